#include "ompfuzz/toolchain.hpp"

#include <set>
#include <sstream>

#include "ompfuzz/process.hpp"

namespace ompfuzz {

namespace fs = std::filesystem;

void ToolchainSpec::validate() const {
  if (id.empty()) throw ConfigError("toolchain id must not be empty");
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    if (!ok) throw ConfigError("toolchain id '" + id + "' may only contain letters, digits, '_', '-', '.'");
  }
  if (command.find("{source}") == std::string::npos)
    throw ConfigError("toolchain '" + id + "': command lacks the {source} placeholder");
  if (command.find("{output}") == std::string::npos)
    throw ConfigError("toolchain '" + id + "': command lacks the {output} placeholder");
}

const ToolchainSpec& find_toolchain(const std::vector<ToolchainSpec>& toolchains, const std::string& id) {
  for (const auto& tc : toolchains)
    if (tc.id == id) return tc;
  throw ConfigError("unknown toolchain '" + id + "'");
}

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) s.replace(pos, from.size(), to);
}

}  // namespace

std::vector<std::string> expand_command(const ToolchainSpec& tc, const fs::path& source, const fs::path& output) {
  std::vector<std::string> argv;
  std::istringstream in(tc.command);
  std::string flat_flags;
  for (const auto& f : tc.flags) flat_flags += (flat_flags.empty() ? "" : " ") + f;
  for (std::string tok; in >> tok;) {
    if (tok == "{flags}") {
      argv.insert(argv.end(), tc.flags.begin(), tc.flags.end());
      continue;
    }
    replace_all(tok, "{source}", source.string());
    replace_all(tok, "{output}", output.string());
    replace_all(tok, "{flags}", flat_flags);
    argv.push_back(tok);
  }
  return argv;
}

CompileResult compile(const fs::path& source, const ToolchainSpec& tc, const fs::path& output,
                      std::chrono::milliseconds timeout) {
  if (!fs::exists(source)) throw std::runtime_error("missing test source " + source.string());
  fs::create_directories(output.parent_path());
  fs::path tmp = output;
  tmp += ".tmp";
  fs::remove(tmp);

  ProcessOptions opts;
  opts.timeout = timeout;
  opts.env = tc.env;
  ProcessResult r;
  try {
    r = run_process(expand_command(tc, source, tmp), opts);
  } catch (const SpawnError& e) {
    throw ConfigError("toolchain '" + tc.id + "': " + e.what());
  }
  CompileResult out;
  out.diagnostics = r.out + r.err;
  if (r.timed_out || r.term_signal != 0 || r.exit_code != 0 || !fs::exists(tmp)) {
    if (r.exit_code == 127 && r.err.find("not found") != std::string::npos)
      throw ConfigError("toolchain '" + tc.id + "': " + r.err);
    out.diagnostics += "\n[" + describe_exit(r) + "]\n";
    fs::remove(tmp);
    return out;
  }
  fs::rename(tmp, output);
  out.ok = true;
  out.binary = output;
  return out;
}

}  // namespace ompfuzz
