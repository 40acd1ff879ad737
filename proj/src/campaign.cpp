#include "ompfuzz/campaign.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>
#include <thread>

#include "ompfuzz/emit.hpp"
#include "ompfuzz/generator.hpp"
#include "ompfuzz/inputs.hpp"
#include "ompfuzz/rng.hpp"

namespace ompfuzz {

namespace fs = std::filesystem;

std::size_t CampaignConfig::expected_records() const {
  return toolchains.size() * static_cast<std::size_t>(n_groups) * static_cast<std::size_t>(tests_per_group) *
         static_cast<std::size_t>(inputs_per_test());
}

void CampaignConfig::validate() const {
  if (toolchains.size() < 2)
    throw ConfigError("toolchains: differential testing needs at least 2, got " + std::to_string(toolchains.size()));
  std::set<std::string> ids;
  for (const auto& tc : toolchains) {
    tc.validate();
    if (!ids.insert(tc.id).second) throw ConfigError("toolchains: duplicate id '" + tc.id + "'");
  }
  if (n_groups < 1) throw ConfigError("campaign.groups: must be positive");
  if (tests_per_group < 1) throw ConfigError("campaign.tests_per_group: must be positive");
  if (!(timeout_seconds > 0)) throw ConfigError("campaign.timeout_seconds: must be positive");
  if (!(compile_timeout_seconds > 0)) throw ConfigError("campaign.compile_timeout_seconds: must be positive");
  if (repetitions < 1) throw ConfigError("campaign.repetitions: must be positive");
  if (compile_jobs < 0) throw ConfigError("campaign.compile_jobs: must be non-negative");
  generator.validate();
}

fs::path test_source_path(const fs::path& dir, int group, int test) {
  return dir / "_tests" / ("_group_" + std::to_string(group)) / ("_test_" + std::to_string(test) + ".cpp");
}

fs::path test_inputs_path(const fs::path& dir, int group, int test) {
  return dir / "_tests" / ("_group_" + std::to_string(group)) / ("_test_" + std::to_string(test) + ".inputs");
}

fs::path binary_path(const fs::path& dir, const std::string& toolchain, int group, int test) {
  return dir / "_bin" / toolchain / ("_group_" + std::to_string(group)) / ("_test_" + std::to_string(test));
}

fs::path compile_log_path(const fs::path& dir, const std::string& toolchain, int group, int test) {
  auto p = binary_path(dir, toolchain, group, test);
  p += ".log";
  return p;
}

fs::path records_path(const fs::path& dir) { return dir / "records.jsonl"; }

std::optional<ProgramOutput> parse_program_output(const std::string& out) {
  std::vector<std::string> lines;
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  if (lines.size() != 2) return std::nullopt;
  if (!lines[0].starts_with("comp=") || !lines[1].starts_with("time_us=")) return std::nullopt;
  ProgramOutput r;
  r.comp = lines[0].substr(5);
  if (r.comp.empty()) return std::nullopt;
  // The token must read as a number, nan or inf.
  {
    char* end = nullptr;
    std::strtod(r.comp.c_str(), &end);
    if (end != r.comp.c_str() + r.comp.size()) return std::nullopt;
  }
  const std::string t = lines[1].substr(8);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos || t.size() > 18) return std::nullopt;
  r.time_us = std::stoll(t);
  return r;
}

// ---- run token ---------------------------------------------------------

RunToken::RunToken(const fs::path& lock_file) {
  if (lock_file.has_parent_path()) fs::create_directories(lock_file.parent_path());
  fd_ = ::open(lock_file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw std::runtime_error("cannot open lock file " + lock_file.string() + ": " + std::strerror(errno));
}

RunToken::~RunToken() {
  if (fd_ >= 0) ::close(fd_);
}

RunToken::Guard::Guard(RunToken& t) : token_(t), lock_(t.mutex_) {
  while (::flock(token_.fd_, LOCK_EX) != 0) {
    if (errno != EINTR) throw std::runtime_error(std::string("flock: ") + std::strerror(errno));
  }
}

RunToken::Guard::~Guard() { ::flock(token_.fd_, LOCK_UN); }

// ---- execution ---------------------------------------------------------

RunRecord execute(const fs::path& binary, const std::vector<std::string>& args, const ExecOptions& options) {
  if (!fs::exists(binary)) throw MissingArtifact(binary, "build");
  std::vector<std::string> argv{fs::absolute(binary).string()};
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessOptions popts;
  popts.timeout = std::chrono::milliseconds(static_cast<long long>(options.timeout_seconds * 1000.0));
  popts.env = options.env;

  RunRecord rec;
  for (int rep = 0; rep < options.repetitions; ++rep) {
    ProcessResult r;
    {
      std::optional<RunToken::Guard> guard;
      if (options.token) guard.emplace(*options.token);
      r = run_process(argv, popts);
    }
    rec.exit = describe_exit(r);
    if (r.timed_out) {
      rec.status = RunStatus::Hang;
      break;
    }
    if (r.term_signal != 0 || r.exit_code != 0) {
      rec.status = RunStatus::Crash;
      break;
    }
    const auto parsed = parse_program_output(r.out);
    if (!parsed) {
      rec.status = RunStatus::Crash;
      rec.exit += " (output contract violated)";
      break;
    }
    if (rec.comp && *rec.comp != parsed->comp) {
      rec.status = RunStatus::Crash;
      rec.exit += " (output differs between repetitions)";
      break;
    }
    rec.status = RunStatus::Ok;
    rec.comp = parsed->comp;
    rec.time_us = rec.time_us ? std::min(*rec.time_us, parsed->time_us) : parsed->time_us;
  }
  if (rec.status != RunStatus::Ok) {
    rec.comp.reset();
    rec.time_us.reset();
  }
  return rec;
}

// ---- stages ------------------------------------------------------------

namespace {

using nlohmann::json;

void say(std::ostream* log, const std::string& msg) {
  if (log) *log << msg << '\n' << std::flush;
}

bool write_if_changed(const fs::path& path, const std::string& content) {
  {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      std::stringstream buf;
      buf << in.rdbuf();
      if (buf.str() == content) return false;
    }
  }
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
  return true;
}

json generator_fingerprint(const CampaignConfig& c) {
  const auto& g = c.generator;
  return json{{"groups", c.n_groups},
              {"tests_per_group", c.tests_per_group},
              {"max_expression_size", g.max_expression_size},
              {"max_nesting_levels", g.max_nesting_levels},
              {"max_lines_in_block", g.max_lines_in_block},
              {"array_size", g.array_size},
              {"max_same_level_blocks", g.max_same_level_blocks},
              {"math_func_allowed", g.math_func_allowed},
              {"math_func_probability", g.math_func_probability},
              {"input_samples_per_run", g.input_samples_per_run},
              {"num_threads", g.num_threads},
              {"seed", g.rng_seed},
              {"max_params", g.max_params},
              {"math_functions", g.math_functions},
              {"near_boundary_decades", g.near_boundary_decades}};
}

fs::path manifest_path(const fs::path& dir) { return dir / "campaign.json"; }

void check_manifest(const CampaignConfig& c, const std::string& stage) {
  const auto path = manifest_path(c.directory);
  std::ifstream in(path);
  if (!in) throw MissingArtifact(path, "generate");
  json stored;
  try {
    stored = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  if (stored != generator_fingerprint(c))
    throw ConfigError(stage + ": generator settings differ from those that produced " + c.directory.string() +
                      "; regenerate or use the original config");
}

std::uint64_t test_seed(const CampaignConfig& c, int g, int t) { return derive_seed(c.generator.rng_seed, g, t); }

struct TestId {
  int group;
  int test;
};

std::vector<TestId> all_tests(const CampaignConfig& c) {
  std::vector<TestId> out;
  for (int g = 0; g < c.n_groups; ++g)
    for (int t = 0; t < c.tests_per_group; ++t) out.push_back({g, t});
  return out;
}

}  // namespace

StageSummary generate_stage(const CampaignConfig& config, std::ostream* log) {
  config.validate();
  StageSummary summary;
  for (const auto [g, t] : all_tests(config)) {
    GeneratorParams p = config.generator;
    p.rng_seed = test_seed(config, g, t);
    const Program program = generate_program(p);
    const std::string source = emit_source(program, p);

    Rng input_rng(derive_seed(p.rng_seed, 0x1a2b3c, 1));
    std::vector<InputSample> samples;
    for (int k = 0; k < config.inputs_per_test(); ++k)
      samples.push_back(gen_input_sample(program, p.array_size, p.near_boundary_decades, input_rng, k));

    const bool a = write_if_changed(test_source_path(config.directory, g, t), source);
    const bool b = write_if_changed(test_inputs_path(config.directory, g, t), format_inputs_file(samples));
    (a || b) ? ++summary.done : ++summary.skipped;
  }
  write_if_changed(manifest_path(config.directory), generator_fingerprint(config).dump(2) + "\n");
  say(log, "generate: " + std::to_string(summary.done) + " written, " + std::to_string(summary.skipped) +
               " unchanged");
  return summary;
}

StageSummary build_stage(const CampaignConfig& config, std::ostream* log) {
  config.validate();
  check_manifest(config, "build");
  struct Job {
    TestId id;
    const ToolchainSpec* tc;
  };
  std::vector<Job> jobs;
  for (const auto id : all_tests(config)) {
    const auto src = test_source_path(config.directory, id.group, id.test);
    if (!fs::exists(src)) throw MissingArtifact(src, "generate");
    for (const auto& tc : config.toolchains) jobs.push_back({id, &tc});
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<std::size_t> skipped{0};
  std::atomic<std::size_t> failed{0};
  std::atomic<bool> abort{false};
  std::mutex err_mutex;
  std::exception_ptr error;
  std::mutex log_mutex;

  auto worker = [&] {
    while (!abort) {
      const std::size_t k = next++;
      if (k >= jobs.size()) return;
      const auto& job = jobs[k];
      const auto src = test_source_path(config.directory, job.id.group, job.id.test);
      const auto bin = binary_path(config.directory, job.tc->id, job.id.group, job.id.test);
      const auto diag = compile_log_path(config.directory, job.tc->id, job.id.group, job.id.test);
      if (fs::exists(bin) || fs::exists(diag)) {
        ++skipped;
        continue;
      }
      try {
        const auto timeout = std::chrono::milliseconds(static_cast<long long>(config.compile_timeout_seconds * 1000));
        const CompileResult r = compile(src, *job.tc, bin, timeout);
        if (r.ok) {
          ++done;
        } else {
          ++failed;
          write_if_changed(diag, r.diagnostics);
          std::lock_guard lock(log_mutex);
          say(log, "build: COMPILE_FAIL " + job.tc->id + " " + src.string());
        }
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (!error) error = std::current_exception();
        abort = true;
      }
    }
  };

  int n = config.compile_jobs > 0 ? config.compile_jobs : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(1, std::min<int>(n, static_cast<int>(jobs.size())));
  {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  StageSummary s{done, skipped, failed};
  say(log, "build: " + std::to_string(s.done) + " compiled, " + std::to_string(s.failed) + " failed, " +
               std::to_string(s.skipped) + " already built");
  return s;
}

StageSummary run_stage(const CampaignConfig& config, std::ostream* log) {
  config.validate();
  check_manifest(config, "run");
  RecordLog records(records_path(config.directory));
  RunToken token(config.directory / ".run.lock");
  StageSummary s;
  const std::size_t total = config.expected_records();
  for (const auto [g, t] : all_tests(config)) {
    const auto inputs_file = test_inputs_path(config.directory, g, t);
    if (!fs::exists(inputs_file)) throw MissingArtifact(inputs_file, "generate");
    const auto inputs = read_inputs_file(inputs_file);
    if (static_cast<int>(inputs.size()) != config.inputs_per_test())
      throw std::runtime_error(inputs_file.string() + ": expected " + std::to_string(config.inputs_per_test()) +
                               " input lines, found " + std::to_string(inputs.size()));
    for (int k = 0; k < config.inputs_per_test(); ++k) {
      for (const auto& tc : config.toolchains) {
        RunRecord rec;
        rec.group = g;
        rec.test = t;
        rec.input = k;
        rec.toolchain = tc.id;
        if (records.contains(rec.key())) {
          ++s.skipped;
          continue;
        }
        const auto bin = binary_path(config.directory, tc.id, g, t);
        if (fs::exists(bin)) {
          ExecOptions opts;
          opts.timeout_seconds = config.timeout_seconds;
          opts.repetitions = config.repetitions;
          opts.env = tc.env;
          opts.token = &token;
          RunRecord r = execute(bin, inputs[static_cast<std::size_t>(k)], opts);
          rec.status = r.status;
          rec.time_us = r.time_us;
          rec.comp = r.comp;
          rec.exit = r.exit;
        } else if (fs::exists(compile_log_path(config.directory, tc.id, g, t))) {
          rec.status = RunStatus::CompileFail;
          rec.exit = "compile";
        } else {
          throw MissingArtifact(bin, "build");
        }
        records.append(rec);
        ++s.done;
        if (log && (rec.status != RunStatus::Ok || records.size() % 50 == 0)) {
          say(log, "run: " + std::to_string(records.size()) + "/" + std::to_string(total) + " group " +
                       std::to_string(g) + " test " + std::to_string(t) + " input " + std::to_string(k) + " " +
                       tc.id + " " + std::string(to_string(rec.status)));
        }
      }
    }
  }
  say(log, "run: " + std::to_string(s.done) + " executed, " + std::to_string(s.skipped) + " already recorded");
  return s;
}

std::vector<RunRecord> run_campaign(const CampaignConfig& config, std::ostream* log) {
  generate_stage(config, log);
  build_stage(config, log);
  run_stage(config, log);
  return read_records(records_path(config.directory));
}

}  // namespace ompfuzz
