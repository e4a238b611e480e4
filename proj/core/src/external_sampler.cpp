#include "pseudoqe/external_sampler.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <json.hpp>

#include "pseudoqe/error.hpp"

namespace pseudoqe {

using json = nlohmann::ordered_json;

struct ExternalSampler::Process {
  pid_t pid = -1;
  int to_child = -1;
  int from_child = -1;
  std::string buffer;  // bytes read but not yet consumed as a line

  // The child runs in its own process group so the whole command line goes
  // down with it, including grandchildren spawned by the shell.
  ~Process() {
    if (to_child >= 0) close(to_child);
    if (from_child >= 0) close(from_child);
    if (pid > 0) {
      kill(-pid, SIGTERM);
      int status = 0;
      bool reaped = false;
      for (int i = 0; i < 100 && !reaped; ++i) {
        if (waitpid(pid, &status, WNOHANG) == pid) {
          reaped = true;
          break;
        }
        usleep(10 * 1000);
      }
      if (!reaped) {
        kill(-pid, SIGKILL);
        waitpid(pid, &status, 0);
      }
    }
  }
};

ExternalSampler::ExternalSampler(const std::string& command,
                                 std::chrono::milliseconds timeout)
    : process_(std::make_unique<Process>()), timeout_(timeout) {
  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
    throw SamplerError("sampler launch failed: pipe: " +
                       std::string(strerror(errno)));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    throw SamplerError("sampler launch failed: fork: " +
                       std::string(strerror(errno)));
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);  // mirror the child's setpgid to close the race
  close(in_pipe[0]);
  close(out_pipe[1]);
  process_->pid = pid;
  process_->to_child = in_pipe[1];
  process_->from_child = out_pipe[0];
  signal(SIGPIPE, SIG_IGN);
}

ExternalSampler::~ExternalSampler() = default;

namespace {

void write_all(int fd, const std::string& data) {
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SamplerError("sampler terminated: write failed: " +
                         std::string(strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
}

// One line from the child, honoring the deadline.
std::string read_line(int fd, std::string& buffer,
                      std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto newline = buffer.find('\n');
    if (newline != std::string::npos) {
      std::string line = buffer.substr(0, newline);
      buffer.erase(0, newline + 1);
      return line;
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      throw SamplerError("sampler timeout: no response within " +
                         std::to_string(timeout.count()) + " ms");
    }
    pollfd pfd{fd, POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw SamplerError("sampler terminated: poll failed: " +
                         std::string(strerror(errno)));
    }
    if (ready == 0) {
      throw SamplerError("sampler timeout: no response within " +
                         std::to_string(timeout.count()) + " ms");
    }
    char chunk[4096];
    const ssize_t n = read(fd, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SamplerError("sampler terminated: read failed: " +
                         std::string(strerror(errno)));
    }
    if (n == 0) {
      throw SamplerError("sampler terminated: child closed its output");
    }
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace

CandidateSet ExternalSampler::top_k(const FillRequest& request, std::size_t k) {
  json req;
  req["src"] = request.source;
  req["ctx"] = request.context;
  req["pos"] = request.position;
  req["mode"] = fill_mode_name(request.mode);
  req["k"] = k;
  write_all(process_->to_child, req.dump() + "\n");

  const std::string line =
      read_line(process_->from_child, process_->buffer, timeout_);
  json resp;
  try {
    resp = json::parse(line);
  } catch (const json::exception& e) {
    throw SamplerError("sampler protocol error: malformed response line: " +
                       std::string(e.what()));
  }
  if (!resp.is_object() || !resp.contains("tokens") ||
      !resp.contains("probs")) {
    throw SamplerError(
        "sampler protocol error: response needs tokens and probs");
  }
  CandidateSet out;
  try {
    out.tokens = resp.at("tokens").get<std::vector<std::string>>();
    out.probs = resp.at("probs").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw SamplerError("sampler protocol error: " + std::string(e.what()));
  }
  try {
    out.validate("sampler response");
  } catch (const ValidationError& e) {
    throw SamplerError(std::string("sampler protocol error: ") + e.what());
  }
  if (out.tokens.size() > k) {
    throw SamplerError("sampler protocol error: more than k candidates");
  }
  return out;
}

}  // namespace pseudoqe
