#pragma once

#include <chrono>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ompfuzz {

/// The executable could not be started at all (missing, not executable).
class SpawnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProcessResult {
  int exit_code = -1;    // valid when term_signal == 0 and !timed_out
  int term_signal = 0;   // signal that ended the process, 0 if none
  bool timed_out = false;
  std::string out;
  std::string err;
  std::chrono::microseconds wall{0};
};

struct ProcessOptions {
  std::chrono::milliseconds timeout{60'000};
  std::chrono::milliseconds grace{2'000};  // SIGINT to SIGKILL
  std::map<std::string, std::string> env;  // added to or overriding the parent environment
  std::size_t output_limit = 1 << 20;      // bytes kept per stream
};

/// Runs argv[0] (looked up in PATH) in its own process group. On timeout the
/// group receives SIGINT, then SIGKILL once grace expires.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options);

std::string describe_exit(const ProcessResult& r);

}  // namespace ompfuzz
