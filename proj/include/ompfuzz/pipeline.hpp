#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "ompfuzz/config.hpp"

namespace ompfuzz {

enum class Command { Generate, Build, Run, Analyze, All, ValidateConfig };

std::optional<Command> parse_command(std::string_view name);

// Exit statuses.
inline constexpr int kExitClean = 0;
inline constexpr int kExitOutliers = 1;
inline constexpr int kExitError = 2;

struct Overrides {
  std::optional<std::filesystem::path> campaign_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> min_time_us;
  std::optional<double> timeout_seconds;
};

/// Applies overrides and revalidates. Throws ConfigErrors.
void apply_overrides(ResolvedConfig& config, const Overrides& o);

/// Files written by analyze.
std::filesystem::path verdicts_path(const std::filesystem::path& campaign_dir);
std::filesystem::path report_path(const std::filesystem::path& campaign_dir);

/// Runs one command. Returns kExitOutliers when analysis found any outlier
/// and kExitError on infrastructure failure (reported on err).
int run_pipeline(Command command, const ResolvedConfig& config, std::ostream& out, std::ostream& err);

}  // namespace ompfuzz
