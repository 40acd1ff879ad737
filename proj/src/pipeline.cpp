#include "ompfuzz/pipeline.hpp"

#include <fstream>
#include <ostream>

namespace ompfuzz {

namespace fs = std::filesystem;

std::optional<Command> parse_command(std::string_view name) {
  if (name == "generate") return Command::Generate;
  if (name == "build") return Command::Build;
  if (name == "run") return Command::Run;
  if (name == "analyze") return Command::Analyze;
  if (name == "all") return Command::All;
  if (name == "validate-config") return Command::ValidateConfig;
  return std::nullopt;
}

void apply_overrides(ResolvedConfig& config, const Overrides& o) {
  if (o.campaign_dir) config.campaign.directory = *o.campaign_dir;
  if (o.seed) config.campaign.generator.rng_seed = *o.seed;
  if (o.alpha) config.analysis.alpha = *o.alpha;
  if (o.beta) config.analysis.beta = *o.beta;
  if (o.min_time_us) config.analysis.min_time_us = *o.min_time_us;
  if (o.timeout_seconds) config.campaign.timeout_seconds = *o.timeout_seconds;
  std::vector<std::string> errors;
  try {
    config.campaign.validate();
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }
  try {
    config.analysis.validate();
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }
  if (!errors.empty()) throw ConfigErrors(errors);
}

fs::path verdicts_path(const fs::path& dir) { return dir / "verdicts.jsonl"; }
fs::path report_path(const fs::path& dir) { return dir / "report.txt"; }

namespace {

int analyze(const ResolvedConfig& config, std::ostream& out) {
  const auto log = records_path(config.campaign.directory);
  if (!fs::exists(log)) throw MissingArtifact(log, "run");
  const auto records = read_records(log);
  const OutlierReport report = analyze_campaign(records, config.analysis);
  const std::string text = format_report(report, config.analysis);
  out << text;
  std::ofstream(report_path(config.campaign.directory)) << text;
  std::ofstream verdicts(verdicts_path(config.campaign.directory), std::ios::trunc);
  verdicts << format_verdicts(report);
  if (!verdicts) throw std::runtime_error("cannot write " + verdicts_path(config.campaign.directory).string());
  return report.outliers() > 0 ? kExitOutliers : kExitClean;
}

}  // namespace

int run_pipeline(Command command, const ResolvedConfig& config, std::ostream& out, std::ostream& err) {
  try {
    switch (command) {
      case Command::ValidateConfig:
        out << describe_config(config) << '\n';
        return kExitClean;
      case Command::Generate:
        generate_stage(config.campaign, &err);
        return kExitClean;
      case Command::Build:
        build_stage(config.campaign, &err);
        return kExitClean;
      case Command::Run:
        run_stage(config.campaign, &err);
        return kExitClean;
      case Command::Analyze:
        return analyze(config, out);
      case Command::All:
        generate_stage(config.campaign, &err);
        build_stage(config.campaign, &err);
        run_stage(config.campaign, &err);
        return analyze(config, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace ompfuzz
