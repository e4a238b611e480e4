#pragma once

#include <cstdint>
#include <string>

#include <CLI11.hpp>

namespace pseudoqe::cli {

// Appends line-delimited JSON events next to the subcommand's primary
// output: one config event (effective flags and seed), then one stage event
// per pipeline step with record count and wall time.
class RunLog {
 public:
  RunLog(const std::string& primary_output, const std::string& subcommand);

  void config(const std::string& effective_config, std::uint64_t seed);
  void stage(const std::string& stage, std::size_t records,
             double wall_ms);

 private:
  std::string path_;
  std::string subcommand_;
};

// Fails with ValidationError naming the path unless it is a readable file.
void require_input(const std::string& path, const std::string& what);

// Wall-clock milliseconds for stage events.
class StageTimer {
 public:
  StageTimer();
  double elapsed_ms() const;

 private:
  std::int64_t start_ns_;
};

}  // namespace pseudoqe::cli
