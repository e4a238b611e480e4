#include "common.hpp"

#include <chrono>
#include <fstream>

#include <json.hpp>

#include "pseudoqe/error.hpp"

namespace pseudoqe::cli {

using json = nlohmann::ordered_json;

namespace {

std::string directory_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  if (slash == std::string::npos) return ".";
  if (slash == 0) return "/";
  return path.substr(0, slash);
}

}  // namespace

RunLog::RunLog(const std::string& primary_output, const std::string& subcommand)
    : path_(directory_of(primary_output) + "/pseudoqe-" + subcommand +
            ".runlog"),
      subcommand_(subcommand) {}

void RunLog::config(const std::string& effective_config, std::uint64_t seed) {
  json event;
  event["event"] = "config";
  event["subcommand"] = subcommand_;
  event["seed"] = seed;
  event["flags"] = effective_config;
  std::ofstream out(path_, std::ios::trunc);
  out << event.dump() << '\n';
}

void RunLog::stage(const std::string& stage, std::size_t records,
                   double wall_ms) {
  json event;
  event["event"] = "stage";
  event["stage"] = stage;
  event["records"] = records;
  event["wall_ms"] = wall_ms;
  std::ofstream out(path_, std::ios::app);
  out << event.dump() << '\n';
}

void require_input(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError(what + " not found: " + path);
  }
}

StageTimer::StageTimer()
    : start_ns_(std::chrono::duration_cast<std::chrono::nanoseconds>(
                    std::chrono::steady_clock::now().time_since_epoch())
                    .count()) {}

double StageTimer::elapsed_ms() const {
  const auto now = std::chrono::duration_cast<std::chrono::nanoseconds>(
                       std::chrono::steady_clock::now().time_since_epoch())
                       .count();
  return static_cast<double>(now - start_ns_) / 1e6;
}

}  // namespace pseudoqe::cli
