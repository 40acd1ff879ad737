#pragma once

#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ompfuzz/params.hpp"
#include "ompfuzz/process.hpp"
#include "ompfuzz/records.hpp"
#include "ompfuzz/toolchain.hpp"

namespace ompfuzz {

struct CampaignConfig {
  std::vector<ToolchainSpec> toolchains;
  int n_groups = 1;
  int tests_per_group = 1;
  GeneratorParams generator;  // input_samples_per_run is the per-test input count
  double timeout_seconds = 60.0;
  double compile_timeout_seconds = 600.0;
  int repetitions = 1;
  int compile_jobs = 0;  // 0: one per hardware thread
  std::filesystem::path directory = "campaign";

  [[nodiscard]] int inputs_per_test() const { return generator.input_samples_per_run; }
  [[nodiscard]] std::size_t expected_records() const;
  /// Throws ConfigError (or ParamError for generator fields).
  void validate() const;
};

// Campaign directory layout.
std::filesystem::path test_source_path(const std::filesystem::path& dir, int group, int test);
std::filesystem::path test_inputs_path(const std::filesystem::path& dir, int group, int test);
std::filesystem::path binary_path(const std::filesystem::path& dir, const std::string& toolchain, int group,
                                  int test);
/// Compiler diagnostics of a failed build; its presence marks COMPILE_FAIL.
std::filesystem::path compile_log_path(const std::filesystem::path& dir, const std::string& toolchain, int group,
                                       int test);
std::filesystem::path records_path(const std::filesystem::path& dir);

/// A stage found an artifact of an earlier stage missing.
class MissingArtifact : public std::runtime_error {
 public:
  explicit MissingArtifact(const std::filesystem::path& path, const std::string& stage)
      : std::runtime_error("missing artifact " + path.string() + " (run '" + stage + "' first)") {}
};

/// Parses the two-line program output contract. nullopt when violated.
struct ProgramOutput {
  std::string comp;
  std::int64_t time_us = 0;
};
std::optional<ProgramOutput> parse_program_output(const std::string& out);

/// Host-wide exclusive right to run a timed execution: a process-local
/// mutex plus an flock on a lock file, so concurrent drivers on the same
/// campaign also serialize.
class RunToken {
 public:
  explicit RunToken(const std::filesystem::path& lock_file);
  ~RunToken();
  RunToken(const RunToken&) = delete;
  RunToken& operator=(const RunToken&) = delete;

  class Guard {
   public:
    explicit Guard(RunToken& t);
    ~Guard();
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    RunToken& token_;
    std::unique_lock<std::mutex> lock_;
  };

 private:
  std::mutex mutex_;
  int fd_ = -1;
};

struct ExecOptions {
  double timeout_seconds = 60.0;
  int repetitions = 1;
  std::map<std::string, std::string> env;
  RunToken* token = nullptr;  // held around each timed process when set
};

/// Runs binary with args once per repetition. Fills status, time_us, comp
/// and exit of the returned record; identity fields are left default.
RunRecord execute(const std::filesystem::path& binary, const std::vector<std::string>& args,
                  const ExecOptions& options);

struct StageSummary {
  std::size_t done = 0;     // work performed
  std::size_t skipped = 0;  // already present
  std::size_t failed = 0;   // compile failures (build stage)
};

/// Writes test sources and input files. Deterministic in config.
StageSummary generate_stage(const CampaignConfig& config, std::ostream* log = nullptr);
/// Compiles every test with every toolchain, in parallel.
StageSummary build_stage(const CampaignConfig& config, std::ostream* log = nullptr);
/// Executes every (test, input, toolchain) missing from the record log.
StageSummary run_stage(const CampaignConfig& config, std::ostream* log = nullptr);

/// generate + build + run; returns the complete record set.
std::vector<RunRecord> run_campaign(const CampaignConfig& config, std::ostream* log = nullptr);

}  // namespace ompfuzz
