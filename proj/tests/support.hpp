#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ompfuzz/analysis.hpp"
#include "ompfuzz/records.hpp"
#include "ompfuzz/toolchain.hpp"

namespace support {

class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "ompfuzz");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& text);

ompfuzz::ToolchainSpec gcc_toolchain(const std::string& opt = "-O3");
ompfuzz::ToolchainSpec clang_toolchain(const std::string& opt = "-O3");
/// Locally usable OpenMP compilers (gcc and/or clang).
std::vector<ompfuzz::ToolchainSpec> openmp_toolchains(const std::string& opt = "-O3");
/// Compiler stand-in producing fixture binaries; plan cycles over test index.
ompfuzz::ToolchainSpec fake_toolchain(const std::string& id, const std::string& plan);
std::filesystem::path fixture(const std::string& mode);

/// Subset-enumeration reference for classify_performance: tries every
/// subset of size >= 2, keeps those whose members are all pairwise
/// comparable, and picks the largest (ties: smaller relative mean absolute
/// deviation, smaller mean, smaller id list).
std::map<std::string, ompfuzz::Verdict> brute_force_performance(const std::map<std::string, double>& times,
                                                                const ompfuzz::AnalysisParams& params);

/// Hand-written one-vs-rest expectation for three implementations P1..P3,
/// indexed by the status triple (OK=0, CRASH=1, HANG=2).
struct CorrectnessRow {
  std::array<ompfuzz::RunStatus, 3> statuses;
  std::array<ompfuzz::Verdict, 3> expected;
  bool anomaly;
};
const std::vector<CorrectnessRow>& correctness_table();

}  // namespace support

#include "ompfuzz/ast.hpp"

namespace support {

struct Features {
  int parallel = 0;
  int omp_for = 0;
  int reduction = 0;
  int critical = 0;
  int if_block = 0;
  int max_for_depth = 0;
  int math_call = 0;
  int assignments = 0;
};
Features features(const ompfuzz::Program& p);

}  // namespace support
