#include "ompfuzz/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <json.hpp>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace ompfuzz {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::None: return "NONE";
    case Verdict::Slow: return "SLOW";
    case Verdict::Fast: return "FAST";
    case Verdict::CrashOutlier: return "CRASH_OUTLIER";
    case Verdict::HangOutlier: return "HANG_OUTLIER";
    case Verdict::Excluded: return "EXCLUDED";
  }
  return "?";
}

void AnalysisParams::validate() const {
  if (!(alpha > 0)) throw std::invalid_argument("analysis.alpha: must be positive");
  if (!(beta > 1 + alpha)) throw std::invalid_argument("analysis.beta: must exceed 1 + alpha");
  if (!(min_time_us >= 0)) throw std::invalid_argument("analysis.min_time_us: must be non-negative");
  if (!(numeric_rel_tol >= 0)) throw std::invalid_argument("analysis.numeric_rel_tol: must be non-negative");
}

bool comparable(double a, double b, double alpha) {
  const double lo = std::min(a, b);
  if (lo == 0) throw std::domain_error("comparable: zero execution time");
  return std::fabs(a - b) / lo <= alpha;
}

double midpoint(std::span<const double> times) {
  if (times.empty()) throw std::domain_error("midpoint: no times");
  return std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
}

namespace {

struct Entry {
  double time;
  std::string id;
};

// Ranking key of a candidate cluster; smaller is better.
struct ClusterKey {
  double spread;
  double mid;
  std::vector<std::string> ids;

  bool operator<(const ClusterKey& o) const { return std::tie(spread, mid, ids) < std::tie(o.spread, o.mid, o.ids); }
};

ClusterKey cluster_key(std::span<const Entry> window) {
  std::vector<double> t;
  for (const auto& e : window) t.push_back(e.time);
  const double m = midpoint(t);
  double dev = 0;
  for (double x : t) dev += std::fabs(x - m);
  ClusterKey k{dev / static_cast<double>(t.size()) / m, m, {}};
  for (const auto& e : window) k.ids.push_back(e.id);
  std::sort(k.ids.begin(), k.ids.end());
  return k;
}

}  // namespace

PerformanceResult classify_performance(const std::map<std::string, double>& times, const AnalysisParams& params) {
  PerformanceResult r;
  auto exclude_all = [&](std::string why) {
    for (const auto& [id, t] : times) r.verdicts[id] = Verdict::Excluded;
    r.reason = std::move(why);
    return r;
  };
  if (times.size() < 3) return exclude_all("fewer than 3 timed runs");
  for (const auto& [id, t] : times) {
    if (t < params.min_time_us) return exclude_all("run below min_time_us");
    if (!(t > 0)) return exclude_all("non-positive run time");
  }

  std::vector<Entry> sorted;
  for (const auto& [id, t] : times) sorted.push_back({t, id});
  std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) { return std::tie(a.time, a.id) < std::tie(b.time, b.id); });

  // A set is pairwise comparable iff its extremes are, so the candidates
  // are windows of the sorted times.
  std::size_t best_size = 0;
  std::size_t best_start = 0;
  std::optional<ClusterKey> best_key;
  std::size_t end = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    end = std::max(end, i + 1);
    while (end < sorted.size() && comparable(sorted[i].time, sorted[end].time, params.alpha)) ++end;
    const std::size_t size = end - i;
    if (size < best_size) continue;
    ClusterKey key = cluster_key(std::span(sorted).subspan(i, size));
    if (size > best_size || key < *best_key) {
      best_size = size;
      best_start = i;
      best_key = std::move(key);
    }
  }
  if (best_size < 2) return exclude_all("no comparable pair");

  const auto window = std::span(sorted).subspan(best_start, best_size);
  const double m = best_key->mid;
  r.midpoint = m;
  r.cluster = best_key->ids;
  for (const auto& [id, t] : times) {
    r.ratio[id] = t / m;
    const bool member = std::any_of(window.begin(), window.end(), [&](const Entry& e) { return e.id == id; });
    Verdict v = Verdict::None;
    if (!member) {
      if (t / m >= params.beta) {
        v = Verdict::Slow;
      } else if (m / t >= params.beta) {
        v = Verdict::Fast;
      }
    }
    r.verdicts[id] = v;
  }
  return r;
}

CorrectnessResult classify_correctness(const std::map<std::string, RunStatus>& statuses) {
  CorrectnessResult r;
  int ok = 0;
  int failed = 0;
  for (const auto& [id, s] : statuses) {
    if (s == RunStatus::Ok) ++ok;
    if (s == RunStatus::Crash || s == RunStatus::Hang) ++failed;
  }
  for (const auto& [id, s] : statuses) {
    switch (s) {
      case RunStatus::Ok: r.verdicts[id] = Verdict::None; break;
      case RunStatus::CompileFail: r.verdicts[id] = Verdict::Excluded; break;
      case RunStatus::Crash: r.verdicts[id] = ok > 0 ? Verdict::CrashOutlier : Verdict::None; break;
      case RunStatus::Hang: r.verdicts[id] = ok > 0 ? Verdict::HangOutlier : Verdict::None; break;
    }
  }
  r.anomaly = ok == 0 && failed > 0;
  return r;
}

bool values_agree(double x, double y, double rel_tol) {
  if (std::memcmp(&x, &y, sizeof x) == 0) return true;
  if (std::isnan(x) || std::isnan(y)) return std::isnan(x) && std::isnan(y);
  if (std::isinf(x) || std::isinf(y)) return false;
  return std::fabs(x - y) <= rel_tol * std::max(std::fabs(x), std::fabs(y));
}

namespace {

std::optional<double> parse_comp(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

AgreementResult numeric_agreement(const std::map<std::string, std::string>& outputs, double rel_tol) {
  AgreementResult r;
  for (auto i = outputs.begin(); i != outputs.end(); ++i) {
    for (auto j = std::next(i); j != outputs.end(); ++j) {
      PairAgreement p{i->first, j->first, false, {}};
      const auto x = parse_comp(i->second);
      const auto y = parse_comp(j->second);
      if (!x || !y) {
        p.detail = "unparseable value '" + (!x ? i->second : j->second) + "'";
      } else {
        p.agree = values_agree(*x, *y, rel_tol);
        if (!p.agree) p.detail = i->second + " vs " + j->second;
      }
      r.agree = r.agree && p.agree;
      r.pairs.push_back(std::move(p));
    }
  }
  return r;
}

int OutlierReport::outliers() const {
  int n = 0;
  for (const auto* table : {&counts, &mismatch_counts})
    for (const auto& [id, c] : *table) n += c.slow + c.fast + c.crash + c.hang;
  return n;
}

OutlierReport analyze_campaign(const std::vector<RunRecord>& records, const AnalysisParams& params) {
  params.validate();
  OutlierReport report;
  report.runs_total = static_cast<int>(records.size());
  std::map<std::tuple<int, int, int>, std::vector<const RunRecord*>> groups;
  std::set<std::string> toolchains;
  for (const auto& r : records) {
    groups[{r.group, r.test, r.input}].push_back(&r);
    toolchains.insert(r.toolchain);
  }
  report.toolchains.assign(toolchains.begin(), toolchains.end());
  for (const auto& id : report.toolchains) {
    report.counts[id] = {};
    report.mismatch_counts[id] = {};
  }

  for (const auto& [key, members] : groups) {
    GroupVerdict gv;
    std::tie(gv.group, gv.test, gv.input) = key;
    std::map<std::string, RunStatus> statuses;
    std::map<std::string, double> times;
    std::map<std::string, std::string> outputs;
    for (const RunRecord* r : members) {
      statuses[r->toolchain] = r->status;
      auto& e = gv.entries[r->toolchain];
      e.status = r->status;
      if (r->status == RunStatus::Ok) {
        e.time_us = static_cast<double>(r->time_us.value_or(0));
        times[r->toolchain] = *e.time_us;
        outputs[r->toolchain] = r->comp.value_or("");
      }
      if (r->status == RunStatus::CompileFail) ++report.compile_failures;
    }

    const CorrectnessResult correctness = classify_correctness(statuses);
    gv.anomaly = correctness.anomaly;
    if (gv.anomaly) ++report.groups_anomaly;

    gv.agreement = numeric_agreement(outputs, params.numeric_rel_tol);
    gv.numeric_mismatch = !gv.agreement.agree;
    if (gv.numeric_mismatch) ++report.groups_numeric_mismatch;

    const PerformanceResult perf = classify_performance(times, params);
    gv.midpoint = perf.midpoint;
    gv.reason = perf.reason;
    const bool short_run = std::any_of(times.begin(), times.end(), [&](const auto& kv) { return kv.second < params.min_time_us; });
    if (short_run) {
      ++report.groups_short;
      report.runs_short += static_cast<int>(times.size());
    } else if (times.size() >= 3) {
      ++report.groups_analyzable;
      report.runs_analyzable += static_cast<int>(times.size());
      if (perf.reason == "no comparable pair") ++report.groups_no_cluster;
    }
    if (gv.numeric_mismatch && params.exclude_numeric_mismatch) gv.reason = "numeric mismatch";

    auto& table = gv.numeric_mismatch ? report.mismatch_counts : report.counts;
    for (auto& [id, e] : gv.entries) {
      if (e.status == RunStatus::Ok) {
        e.verdict = perf.verdicts.at(id);
        if (gv.numeric_mismatch && params.exclude_numeric_mismatch) e.verdict = Verdict::Excluded;
        if (auto it = perf.ratio.find(id); it != perf.ratio.end()) e.ratio = it->second;
      } else {
        e.verdict = correctness.verdicts.at(id);
      }
      switch (e.verdict) {
        case Verdict::Slow: ++table[id].slow; break;
        case Verdict::Fast: ++table[id].fast; break;
        case Verdict::CrashOutlier: ++report.counts[id].crash; break;
        case Verdict::HangOutlier: ++report.counts[id].hang; break;
        case Verdict::Excluded: ++table[id].excluded; break;
        case Verdict::None: break;
      }
    }
    report.groups.push_back(std::move(gv));
  }
  report.groups_total = static_cast<int>(report.groups.size());
  return report;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool right = true) {
  if (s.size() >= width) return s;
  return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

void write_table(std::ostringstream& out, const OutlierReport& rep, const std::map<std::string, ToolchainCounts>& table) {
  std::size_t w = 9;
  for (const auto& id : rep.toolchains) w = std::max(w, id.size());
  out << pad("toolchain", w, false) << pad("Slow", 7) << pad("Fast", 7) << pad("Crash", 7) << pad("Hang", 7)
      << pad("Excluded", 10) << '\n';
  for (const auto& id : rep.toolchains) {
    const auto& c = table.at(id);
    out << pad(id, w, false) << pad(std::to_string(c.slow), 7) << pad(std::to_string(c.fast), 7)
        << pad(std::to_string(c.crash), 7) << pad(std::to_string(c.hang), 7) << pad(std::to_string(c.excluded), 10)
        << '\n';
  }
}

}  // namespace

std::string format_report(const OutlierReport& rep, const AnalysisParams& params) {
  std::ostringstream out;
  out << "outlier summary (alpha=" << params.alpha << ", beta=" << params.beta
      << ", min_time_us=" << params.min_time_us << ")\n\n";
  write_table(out, rep, rep.counts);
  out << "\ngroups: " << rep.groups_total << " total (" << rep.runs_total << " runs)\n"
      << "  analyzable after the min-time filter: " << rep.groups_analyzable << " groups, " << rep.runs_analyzable
      << " runs\n"
      << "  below min_time_us: " << rep.groups_short << " groups, " << rep.runs_short << " runs\n"
      << "  without a comparable pair: " << rep.groups_no_cluster << '\n'
      << "  no toolchain finished: " << rep.groups_anomaly << '\n'
      << "  compile failures: " << rep.compile_failures << " runs\n";
  out << "\nnumeric mismatch: " << rep.groups_numeric_mismatch << " groups";
  if (rep.groups_numeric_mismatch > 0) {
    out << (params.exclude_numeric_mismatch ? " (excluded from performance verdicts)\n\n" : "\n\n");
    write_table(out, rep, rep.mismatch_counts);
  } else {
    out << '\n';
  }

  bool header = false;
  for (const auto& g : rep.groups) {
    for (const auto& [id, e] : g.entries) {
      if (e.verdict == Verdict::None || e.verdict == Verdict::Excluded) continue;
      if (!header) {
        out << "\noutliers:\n";
        header = true;
      }
      out << "  group " << g.group << " test " << g.test << " input " << g.input << ": " << id << ' '
          << to_string(e.verdict);
      if (e.ratio && g.midpoint) out << " ratio " << fixed(*e.ratio, 3) << " (midpoint " << fixed(*g.midpoint, 1) << " us)";
      if (g.numeric_mismatch) out << " [numeric mismatch]";
      out << '\n';
    }
  }
  if (!header) out << "\nno outliers\n";
  return out.str();
}

std::string format_verdicts(const OutlierReport& report) {
  std::string out;
  for (const auto& g : report.groups) {
    for (const auto& [id, e] : g.entries) {
      nlohmann::json j;
      j["test"] = g.test;
      j["group"] = g.group;
      j["input"] = g.input;
      j["toolchain"] = id;
      j["status"] = to_string(e.status);
      j["verdict"] = to_string(e.verdict);
      j["midpoint"] = g.midpoint ? nlohmann::json(*g.midpoint) : nlohmann::json(nullptr);
      j["ratio"] = e.ratio ? nlohmann::json(*e.ratio) : nlohmann::json(nullptr);
      if (e.time_us) j["time_us"] = *e.time_us;
      j["numeric_mismatch"] = g.numeric_mismatch;
      if (!g.reason.empty()) j["reason"] = g.reason;
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

}  // namespace ompfuzz
