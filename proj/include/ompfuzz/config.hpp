#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ompfuzz/analysis.hpp"
#include "ompfuzz/campaign.hpp"

namespace ompfuzz {

/// Every field-level problem found in a config file.
class ConfigErrors : public std::runtime_error {
 public:
  explicit ConfigErrors(std::vector<std::string> errors);
  [[nodiscard]] const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct ResolvedConfig {
  CampaignConfig campaign;
  AnalysisParams analysis;
};

/// Parses JSON text with sections "toolchains", "generator", "campaign" and
/// "analysis". Omitted analysis fields take the evaluation defaults; the
/// campaign directory is resolved against base_dir when relative.
ResolvedConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ResolvedConfig load_config(const std::filesystem::path& path);

/// The fully resolved configuration as JSON, for echoing back to the user.
std::string describe_config(const ResolvedConfig& config);

}  // namespace ompfuzz
