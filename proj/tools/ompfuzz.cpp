#include <CLI11.hpp>
#include <iostream>

#include "ompfuzz/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace ompfuzz;
  CLI::App app{"Differential correctness and performance testing of OpenMP implementations"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides o;
  std::string dir;
  std::uint64_t seed = 0;
  double alpha = 0;
  double beta = 0;
  double min_time = 0;
  double timeout = 0;

  const std::vector<std::pair<Command, std::string>> commands{
      {Command::Generate, "Write test programs and inputs"},
      {Command::Build, "Compile every test with every toolchain"},
      {Command::Run, "Execute the matrix (resumes an interrupted run)"},
      {Command::Analyze, "Classify outliers and write the report"},
      {Command::All, "generate, build, run and analyze"},
      {Command::ValidateConfig, "Check a config and print the resolved values"}};
  const char* names[] = {"generate", "build", "run", "analyze", "all", "validate-config"};

  std::vector<CLI::App*> subs;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    auto* sub = app.add_subcommand(names[k], commands[k].second);
    sub->add_option("--config", config_path, "Campaign config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--campaign-dir", dir, "Campaign directory (overrides the config)");
    sub->add_option("--seed", seed, "Generator seed (overrides the config)");
    sub->add_option("--alpha", alpha, "Comparability threshold");
    sub->add_option("--beta", beta, "Outlier ratio");
    sub->add_option("--min-time-us", min_time, "Short-run filter in microseconds");
    sub->add_option("--timeout", timeout, "Per-run timeout in seconds");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  Command command = Command::All;
  CLI::App* chosen = nullptr;
  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (subs[k]->parsed()) {
      command = commands[k].first;
      chosen = subs[k];
    }
  }
  if (chosen->count("--campaign-dir")) o.campaign_dir = dir;
  if (chosen->count("--seed")) o.seed = seed;
  if (chosen->count("--alpha")) o.alpha = alpha;
  if (chosen->count("--beta")) o.beta = beta;
  if (chosen->count("--min-time-us")) o.min_time_us = min_time;
  if (chosen->count("--timeout")) o.timeout_seconds = timeout;

  ResolvedConfig config;
  try {
    config = load_config(config_path);
    apply_overrides(config, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return run_pipeline(command, config, std::cout, std::cerr);
}
