#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ompfuzz/records.hpp"

namespace ompfuzz {

enum class Verdict { None, Slow, Fast, CrashOutlier, HangOutlier, Excluded };
std::string_view to_string(Verdict v);

struct AnalysisParams {
  double alpha = 0.2;
  double beta = 1.5;
  double min_time_us = 1000;
  double numeric_rel_tol = 1e-12;
  bool exclude_numeric_mismatch = false;

  /// Throws std::invalid_argument naming the field.
  void validate() const;
};

/// |a - b| / min(a, b) <= alpha. Throws std::domain_error when min is 0.
bool comparable(double a, double b, double alpha);

/// Arithmetic mean. Throws std::domain_error on empty input.
double midpoint(std::span<const double> times);

struct PerformanceResult {
  std::map<std::string, Verdict> verdicts;
  std::vector<std::string> cluster;  // the reference subset, sorted by id
  std::optional<double> midpoint;
  std::map<std::string, double> ratio;  // time / midpoint
  std::string reason;                   // why the group was excluded, if it was
};

/// Slow/fast outliers against the largest pairwise-comparable subset.
/// Among equally large subsets the one with the smaller relative mean
/// absolute deviation wins, then the smaller midpoint, then the
/// lexicographically smaller id list.
PerformanceResult classify_performance(const std::map<std::string, double>& times, const AnalysisParams& params);

struct CorrectnessResult {
  std::map<std::string, Verdict> verdicts;
  bool anomaly = false;  // no toolchain finished, so nobody is an outlier
};

/// CRASH/HANG is an outlier when some other toolchain is OK. COMPILE_FAIL
/// entries are Excluded and do not count as OK.
CorrectnessResult classify_correctness(const std::map<std::string, RunStatus>& statuses);

struct PairAgreement {
  std::string a;
  std::string b;
  bool agree = false;
  std::string detail;
};

struct AgreementResult {
  bool agree = true;
  std::vector<PairAgreement> pairs;
};

/// Bit-equal, both NaN, or |x - y| <= rel_tol * max(|x|, |y|).
bool values_agree(double x, double y, double rel_tol);
AgreementResult numeric_agreement(const std::map<std::string, std::string>& outputs, double rel_tol);

struct ToolchainCounts {
  int slow = 0;
  int fast = 0;
  int crash = 0;
  int hang = 0;
  int excluded = 0;
  bool operator==(const ToolchainCounts&) const = default;
};

struct GroupVerdict {
  int group = 0;
  int test = 0;
  int input = 0;
  struct Entry {
    RunStatus status = RunStatus::Ok;
    Verdict verdict = Verdict::None;
    std::optional<double> time_us;
    std::optional<double> ratio;
  };
  std::map<std::string, Entry> entries;
  std::optional<double> midpoint;
  bool numeric_mismatch = false;
  bool anomaly = false;
  std::string reason;
  AgreementResult agreement;
};

struct OutlierReport {
  std::vector<std::string> toolchains;
  std::map<std::string, ToolchainCounts> counts;           // numerically agreeing groups
  std::map<std::string, ToolchainCounts> mismatch_counts;  // numeric-mismatch section
  std::vector<GroupVerdict> groups;
  int groups_total = 0;
  int runs_total = 0;
  int groups_short = 0;  // removed by the min-time filter
  int runs_short = 0;
  int groups_analyzable = 0;  // survived the min-time filter with >= 3 OK runs
  int runs_analyzable = 0;
  int groups_no_cluster = 0;
  int groups_numeric_mismatch = 0;
  int groups_anomaly = 0;
  int compile_failures = 0;

  [[nodiscard]] int outliers() const;
};

OutlierReport analyze_campaign(const std::vector<RunRecord>& records, const AnalysisParams& params);

/// Human-readable summary.
std::string format_report(const OutlierReport& report, const AnalysisParams& params);
/// One JSON line per (group, test, input, toolchain).
std::string format_verdicts(const OutlierReport& report);

}  // namespace ompfuzz
