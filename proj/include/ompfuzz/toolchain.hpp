#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ompfuzz {

/// Campaign misconfiguration: unknown toolchain, missing compiler binary,
/// bad config field. Distinct from a test failing to compile.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ToolchainSpec {
  std::string id;
  std::string command;  // e.g. "g++ {flags} {source} -o {output}"
  std::vector<std::string> flags;
  std::map<std::string, std::string> env;

  /// Throws ConfigError.
  void validate() const;
};

const ToolchainSpec& find_toolchain(const std::vector<ToolchainSpec>& toolchains, const std::string& id);

/// Whitespace-split command with placeholders substituted; a bare {flags}
/// token expands to the flag list.
std::vector<std::string> expand_command(const ToolchainSpec& tc, const std::filesystem::path& source,
                                        const std::filesystem::path& output);

struct CompileResult {
  bool ok = false;
  std::filesystem::path binary;
  std::string diagnostics;  // compiler stdout+stderr, verbatim
};

/// Compiles source to output (written atomically via a temporary and
/// rename). Throws ConfigError when the compiler cannot be executed.
CompileResult compile(const std::filesystem::path& source, const ToolchainSpec& tc,
                      const std::filesystem::path& output,
                      std::chrono::milliseconds timeout = std::chrono::minutes(10));

}  // namespace ompfuzz
