// One PASS/FAIL line per acceptance criterion.
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "ompfuzz/analysis.hpp"
#include "ompfuzz/campaign.hpp"
#include "ompfuzz/emit.hpp"
#include "ompfuzz/generator.hpp"
#include "ompfuzz/inputs.hpp"
#include "ompfuzz/process.hpp"
#include "ompfuzz/validate.hpp"
#include "support.hpp"
#include "test_env.hpp"

using namespace ompfuzz;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fs", s);
  return buf;
}

int count_verdict(const std::map<std::string, Verdict>& v, Verdict want) {
  int n = 0;
  for (const auto& [id, x] : v) n += x == want;
  return n;
}

// Runs fn over [0, n) on every hardware thread.
void parallel_for(int n, const std::function<void(int)>& fn) {
  std::atomic<int> next{0};
  const int workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) fn(k);
    });
}

Outcome oracle_grid() {
  const auto t0 = Clock::now();
  AnalysisParams p;
  std::vector<double> grid;
  for (int k = 0; k < 20; ++k) grid.push_back(std::round(1000.0 * std::pow(1e4, k / 19.0)));
  int mismatches = 0;
  int total = 0;
  for (double a : grid)
    for (double b : grid)
      for (double c : grid) {
        const std::map<std::string, double> t{{"A", a}, {"B", b}, {"C", c}};
        mismatches += classify_performance(t, p).verdicts != support::brute_force_performance(t, p);
        ++total;
      }
  const double s = seconds_since(t0);
  return {mismatches == 0 && s < 10.0,
          std::to_string(total) + " triples, " + std::to_string(mismatches) + " mismatches, " + fmt_seconds(s)};
}

Outcome paper_scenarios() {
  AnalysisParams p;
  const double minute = 60e6;
  const auto slow = classify_performance({{"A", 5 * minute}, {"B", 5 * minute}, {"C", 9 * minute}}, p).verdicts;
  const bool s_ok = count_verdict(slow, Verdict::Slow) == 1 && slow.at("C") == Verdict::Slow &&
                    count_verdict(slow, Verdict::None) == 2;
  // 100/110/40 in milliseconds, then in raw microseconds with the short-run filter off.
  const auto fast_ms = classify_performance({{"A", 100e3}, {"B", 110e3}, {"C", 40e3}}, p).verdicts;
  AnalysisParams raw = p;
  raw.min_time_us = 0;
  const auto fast_raw = classify_performance({{"A", 100}, {"B", 110}, {"C", 40}}, raw).verdicts;
  auto one_fast = [](const auto& v) {
    return count_verdict(v, Verdict::Fast) == 1 && v.at("C") == Verdict::Fast && count_verdict(v, Verdict::None) == 2;
  };
  const bool f_ok = one_fast(fast_ms) && one_fast(fast_raw);
  return {s_ok && f_ok, std::string("{5,5,9} min ") + (s_ok ? "one SLOW" : "wrong") + ", {100,110,40} " +
                            (f_ok ? "one FAST" : "wrong")};
}

Outcome correctness_taxonomy() {
  int mismatches = 0;
  for (const auto& row : support::correctness_table()) {
    const auto r =
        classify_correctness({{"P1", row.statuses[0]}, {"P2", row.statuses[1]}, {"P3", row.statuses[2]}});
    mismatches += r.verdicts.at("P1") != row.expected[0] || r.verdicts.at("P2") != row.expected[1] ||
                  r.verdicts.at("P3") != row.expected[2] || r.anomaly != row.anomaly;
  }
  const auto ex = classify_correctness({{"P1", RunStatus::Ok}, {"P2", RunStatus::Crash}, {"P3", RunStatus::Ok}});
  const bool worked = ex.verdicts.at("P2") == Verdict::CrashOutlier && ex.verdicts.at("P1") == Verdict::None &&
                      ex.verdicts.at("P3") == Verdict::None;
  return {support::correctness_table().size() == 27 && mismatches == 0 && worked,
          std::to_string(support::correctness_table().size()) + " cases, " + std::to_string(mismatches) +
              " mismatches, {OK,CRASH,OK} -> " + (worked ? "P2 CRASH_OUTLIER" : "wrong")};
}

Outcome generator_soundness(const fs::path& work) {
  const auto t0 = Clock::now();
  const auto tcs = support::openmp_toolchains("-O3");
  if (tcs.size() < 2) return {false, "only " + std::to_string(tcs.size()) + " OpenMP compiler(s) available"};
  const fs::path dir = work / "c4";
  fs::create_directories(dir);
  constexpr int kN = 100;
  std::atomic<int> invalid{0};
  std::atomic<int> failed{0};
  std::mutex m;
  std::string first_failure;
  std::vector<fs::path> sources(kN);
  for (int k = 0; k < kN; ++k) {
    const auto p = evaluation_params(4, 40000 + k);
    const Program prog = generate_program(p);
    if (!validate_program(prog, p).empty()) {
      ++invalid;
      continue;
    }
    sources[k] = dir / ("t" + std::to_string(k) + ".cpp");
    support::write_file(sources[k], emit_source(prog, p));
  }
  parallel_for(kN * static_cast<int>(tcs.size()), [&](int job) {
    const int k = job / static_cast<int>(tcs.size());
    const auto& tc = tcs[static_cast<std::size_t>(job) % tcs.size()];
    if (sources[k].empty()) return;
    const auto r = compile(sources[k], tc, dir / (tc.id + "_" + std::to_string(k)));
    if (!r.ok) {
      ++failed;
      std::lock_guard lock(m);
      if (first_failure.empty()) first_failure = tc.id + " " + sources[k].string() + ": " + r.diagnostics.substr(0, 300);
    }
  });
  const double s = seconds_since(t0);
  std::string ids;
  for (const auto& tc : tcs) ids += (ids.empty() ? "" : "+") + tc.id;
  std::string detail = std::to_string(kN) + " programs, " + std::to_string(invalid) + " invalid, " +
                       std::to_string(failed) + " failed compiles with " + ids + " -O3, " + fmt_seconds(s);
  if (!first_failure.empty()) detail += "; first failure: " + first_failure;
  return {invalid == 0 && failed == 0 && s < 300, detail};
}

Outcome race_freedom(const fs::path& work) {
  const auto t0 = Clock::now();
  const auto tcs = support::openmp_toolchains("-O3");
  if (tcs.empty()) return {false, "no OpenMP compiler available"};
  const auto& ref = tcs.front();
  const fs::path dir = work / "c5";
  fs::create_directories(dir);
  constexpr int kN = 50;
  constexpr int kInputs = 2;
  struct Case {
    bool reduction = false;
    std::vector<std::vector<std::string>> inputs;
  };
  std::vector<Case> cases(kN);
  for (int k = 0; k < kN; ++k) {
    auto p = evaluation_params(4, 50000 + k);
    const Program prog = generate_program(p);
    cases[k].reduction = support::features(prog).reduction > 0;
    Rng rng(derive_seed(p.rng_seed, 5, 5));
    for (int i = 0; i < kInputs; ++i)
      cases[k].inputs.push_back(serialize_input(gen_input_sample(prog, p.array_size, p.near_boundary_decades, rng, i)));
    for (int threads : {1, 4}) {
      p.num_threads = threads;
      support::write_file(dir / ("t" + std::to_string(k) + "_" + std::to_string(threads) + ".cpp"),
                          emit_source(prog, p));
    }
  }
  std::atomic<int> build_failures{0};
  parallel_for(kN * 2, [&](int job) {
    const std::string stem = "t" + std::to_string(job / 2) + "_" + (job % 2 ? "4" : "1");
    if (!compile(dir / (stem + ".cpp"), ref, dir / stem).ok) ++build_failures;
  });
  if (build_failures) return {false, std::to_string(build_failures) + " compile failures"};

  int identical = 0, within_tol = 0, violations = 0, unrun = 0, reduction_runs = 0;
  std::string first;
  ExecOptions o;
  o.timeout_seconds = 60;
  for (int k = 0; k < kN; ++k) {
    for (const auto& args : cases[k].inputs) {
      const auto one = execute(dir / ("t" + std::to_string(k) + "_1"), args, o);
      const auto four = execute(dir / ("t" + std::to_string(k) + "_4"), args, o);
      if (one.status != RunStatus::Ok || four.status != RunStatus::Ok) {
        ++unrun;
        if (first.empty()) first = "test " + std::to_string(k) + ": " + one.exit + " / " + four.exit;
        continue;
      }
      const bool same = *one.comp == *four.comp;
      if (cases[k].reduction) {
        ++reduction_runs;
        const double a = std::strtod(one.comp->c_str(), nullptr);
        const double b = std::strtod(four.comp->c_str(), nullptr);
        if (same) {
          ++identical;
        } else if (values_agree(a, b, 1e-12)) {
          ++within_tol;
        } else {
          ++violations;
          if (first.empty()) first = "test " + std::to_string(k) + ": " + *one.comp + " vs " + *four.comp;
        }
      } else if (same) {
        ++identical;
      } else {
        ++violations;
        if (first.empty()) first = "test " + std::to_string(k) + ": " + *one.comp + " vs " + *four.comp;
      }
    }
  }
  const double s = seconds_since(t0);
  std::string detail = std::to_string(kN * kInputs) + " runs with " + ref.id + ": " + std::to_string(identical) +
                       " bit-identical, " + std::to_string(within_tol) + " within 1e-12 (" +
                       std::to_string(reduction_runs) + " reduction runs), " + std::to_string(violations) +
                       " violations, " + std::to_string(unrun) + " not OK, " + fmt_seconds(s);
  if (!first.empty()) detail += "; first: " + first;
  return {violations == 0 && unrun == 0 && s < 300, detail};
}

Outcome grammar_coverage() {
  support::Features total;
  for (int k = 0; k < 200; ++k) {
    const auto f = support::features(generate_program(evaluation_params(4, 60000 + k)));
    total.parallel += f.parallel;
    total.omp_for += f.omp_for;
    total.reduction += f.reduction;
    total.critical += f.critical;
    total.if_block += f.if_block;
    total.max_for_depth = std::max(total.max_for_depth, f.max_for_depth);
    total.math_call += f.math_call;
  }
  std::ostringstream d;
  d << "parallel=" << total.parallel << " omp_for=" << total.omp_for << " reduction=" << total.reduction
    << " critical=" << total.critical << " if=" << total.if_block << " max_for_depth=" << total.max_for_depth
    << " math=" << total.math_call;
  return {total.parallel > 0 && total.omp_for > 0 && total.reduction > 0 && total.critical > 0 &&
              total.if_block > 0 && total.max_for_depth >= 2 && total.math_call > 0,
          d.str()};
}

Outcome input_classes() {
  constexpr int kSamples = 100000;
  const double decades = GeneratorParams{}.near_boundary_decades;
  int bad_class = 0, bad_trip = 0;
  Rng rng(7);
  for (const FpClass c : kAllFpClasses) {
    for (int k = 0; k < kSamples; ++k) {
      const double d = gen_double(c, rng, decades);
      bad_class += !in_class(d, c, decades);
      bad_trip += std::bit_cast<std::uint64_t>(parse_fp_token(format_double_token(d), Precision::Double)) !=
                  std::bit_cast<std::uint64_t>(d);
      const float f = gen_float(c, rng, decades);
      bad_class += !in_class(f, c, decades);
      const auto back = static_cast<float>(parse_fp_token(format_double_token(f), Precision::Single));
      bad_trip += std::bit_cast<std::uint32_t>(back) != std::bit_cast<std::uint32_t>(f);
    }
  }
  // Named edge values.
  for (const double v : {0.0, -0.0, 4.9406564584124654e-324, -2.2250738585072009e-308, 1.7976931348623157e308}) {
    bad_trip += std::bit_cast<std::uint64_t>(parse_fp_token(format_double_token(v), Precision::Double)) !=
                std::bit_cast<std::uint64_t>(v);
  }
  for (const float v : {0.0f, -0.0f, 1.4e-45f, -1.1754942e-38f}) {
    const auto back = static_cast<float>(parse_fp_token(format_double_token(v), Precision::Single));
    bad_trip += std::bit_cast<std::uint32_t>(back) != std::bit_cast<std::uint32_t>(v);
  }
  return {bad_class == 0 && bad_trip == 0,
          std::to_string(kSamples) + " per class per precision, " + std::to_string(bad_class) +
              " outside their class, " + std::to_string(bad_trip) + " round-trip mismatches"};
}

Outcome campaign_accounting(const fs::path& work) {
  const auto tcs = support::openmp_toolchains("-O2");
  if (tcs.empty()) return {false, "no OpenMP compiler available"};
  CampaignConfig c;
  c.toolchains = {tcs.front(), support::fake_toolchain("injected", "ok,hang,ok,segv,ok")};
  c.n_groups = 1;
  c.tests_per_group = 5;
  c.generator = evaluation_params(2, 8080);
  c.generator.array_size = 64;
  c.generator.input_samples_per_run = 2;
  c.timeout_seconds = 2;
  c.directory = work / "c8";
  const auto records = run_campaign(c);
  int hang = 0, crash = 0, other = 0;
  for (const auto& r : records) {
    if (r.toolchain != "injected") continue;
    if (r.test == 1) hang += r.status == RunStatus::Hang;
    else if (r.test == 3) crash += r.status == RunStatus::Crash;
    else other += r.status != RunStatus::Ok;
  }
  const bool count_ok = records.size() == 20;
  const bool inject_ok = hang == 2 && crash == 2 && other == 0;

  // A 3-way group whose 500 us run would be FAST without the filter.
  CampaignConfig s = c;
  s.toolchains = {support::fake_toolchain("x", "ok"), support::fake_toolchain("y", "ok"),
                  support::fake_toolchain("z", "short")};
  s.tests_per_group = 1;
  s.generator.input_samples_per_run = 1;
  s.directory = work / "c8short";
  const auto short_records = run_campaign(s);
  AnalysisParams unfiltered;
  unfiltered.min_time_us = 0;
  const auto without = analyze_campaign(short_records, unfiltered);
  const auto with = analyze_campaign(short_records, AnalysisParams{});
  const bool filter_ok = without.counts.at("z").fast == 1 && with.groups_short == 1 && with.outliers() == 0 &&
                         with.groups.at(0).entries.at("z").verdict == Verdict::Excluded &&
                         *with.groups.at(0).entries.at("z").time_us == 500;
  return {count_ok && inject_ok && filter_ok,
          std::to_string(records.size()) + " records (" + c.toolchains[0].id + " + injected fixtures), " +
              std::to_string(hang) + " HANG, " + std::to_string(crash) + " CRASH, 500 us group " +
              (filter_ok ? "excluded" : "not excluded")};
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = support::read_file(e.path());
  return out;
}

Outcome determinism(const fs::path& work) {
  const fs::path cfg = fs::path(test_env::kSourceDir) / "configs" / "paper.json";
  const fs::path dir = work / "c9";
  std::map<std::string, std::string> runs[2];
  for (auto& snap : runs) {
    fs::remove_all(dir);
    ProcessOptions o;
    o.timeout = std::chrono::minutes(5);
    const auto r = run_process({test_env::kCli, "generate", "--config", cfg.string(), "--campaign-dir", dir.string()}, o);
    if (r.exit_code != 0) return {false, "generate failed: " + r.err};
    snap = snapshot(dir / "_tests");
  }
  return {!runs[0].empty() && runs[0] == runs[1],
          std::to_string(runs[0].size()) + " files, trees " + (runs[0] == runs[1] ? "identical" : "differ")};
}

Outcome scale_invariance() {
  AnalysisParams filtered;
  AnalysisParams unfiltered;
  unfiltered.min_time_us = 0;
  Rng rng(10);
  int changed = 0;
  int outliers = 0;
  for (int n = 0; n < 10000; ++n) {
    std::map<std::string, double> t;
    const int size = static_cast<int>(rng.uniform_int(3, 6));
    // Clustered times >= 1e4 us so the draw exercises SLOW and FAST, not only exclusions.
    const double base = 1e4 * std::pow(10.0, 2 * rng.uniform01());
    for (int k = 0; k < size; ++k) t["T" + std::to_string(k)] = base * std::pow(3.0, 2 * rng.uniform01());
    // In [0.1, 10] the filtered run never crosses min_time_us; the unfiltered run takes any constant.
    const double c = std::pow(10.0, 2 * rng.uniform01() - 1);
    const double wide = std::pow(10.0, 12 * rng.uniform01() - 6);
    auto scaled = t;
    auto scaled_wide = t;
    for (auto& [id, v] : scaled) v *= c;
    for (auto& [id, v] : scaled_wide) v *= wide;
    const auto base_verdicts = classify_performance(t, filtered).verdicts;
    for (const auto& [id, v] : base_verdicts) outliers += v == Verdict::Slow || v == Verdict::Fast;
    changed += base_verdicts != classify_performance(scaled, filtered).verdicts;
    changed += classify_performance(t, unfiltered).verdicts != classify_performance(scaled_wide, unfiltered).verdicts;
  }
  return {changed == 0, "10000 groups (" + std::to_string(outliers) + " outlier verdicts), " +
                            std::to_string(changed) + " changed verdicts"};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "ompfuzz_acceptance";
  for (int k = 1; k + 1 < argc; ++k)
    if (std::strcmp(argv[k], "--work-dir") == 0) work = argv[k + 1];
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"outlier math matches subset enumeration", oracle_grid},
      {"paper timing scenarios", paper_scenarios},
      {"correctness taxonomy", correctness_taxonomy},
      {"generator soundness", [&] { return generator_soundness(work); }},
      {"race-freedom across thread counts", [&] { return race_freedom(work); }},
      {"grammar coverage", grammar_coverage},
      {"input classes and round-trip", input_classes},
      {"campaign accounting", [&] { return campaign_accounting(work); }},
      {"generate determinism", [&] { return determinism(work); }},
      {"scale invariance", scale_invariance},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << k + 1 << " " << criteria[k].first << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
