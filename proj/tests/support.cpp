#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "test_env.hpp"

namespace fs = std::filesystem;
using ompfuzz::RunStatus;
using ompfuzz::Verdict;

namespace support {

TempDir::TempDir(const std::string& prefix) {
  std::string tmpl = (fs::temp_directory_path() / (prefix + "-XXXXXX")).string();
  if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

}  // namespace

ompfuzz::ToolchainSpec gcc_toolchain(const std::string& opt) {
  ompfuzz::ToolchainSpec tc;
  tc.id = "gcc";
  tc.command = std::string(test_env::kGxx) + " {flags} {source} -o {output}";
  tc.flags = {opt};
  for (auto& f : split(test_env::kGxxFlags)) tc.flags.push_back(f);
  return tc;
}

ompfuzz::ToolchainSpec clang_toolchain(const std::string& opt) {
  ompfuzz::ToolchainSpec tc;
  tc.id = "clang";
  tc.command = std::string(test_env::kClang) + " {flags} {source} -o {output}";
  tc.flags = {opt};
  for (auto& f : split(test_env::kClangFlags)) tc.flags.push_back(f);
  return tc;
}

std::vector<ompfuzz::ToolchainSpec> openmp_toolchains(const std::string& opt) {
  std::vector<ompfuzz::ToolchainSpec> out;
  if (test_env::kGxxOk) out.push_back(gcc_toolchain(opt));
  if (test_env::kClangOk) out.push_back(clang_toolchain(opt));
  return out;
}

fs::path fixture(const std::string& mode) { return fs::path(test_env::kFixtureDir) / ("fixture_" + mode); }

ompfuzz::ToolchainSpec fake_toolchain(const std::string& id, const std::string& plan) {
  ompfuzz::ToolchainSpec tc;
  tc.id = id;
  tc.command = (fs::path(test_env::kFixtureDir) / "fakecc").string() + " --plan " + plan + " {flags} {source} -o {output}";
  tc.flags = {"-O3"};
  return tc;
}

std::map<std::string, Verdict> brute_force_performance(const std::map<std::string, double>& times,
                                                       const ompfuzz::AnalysisParams& params) {
  std::map<std::string, Verdict> out;
  std::vector<std::pair<std::string, double>> items(times.begin(), times.end());
  const auto exclude = [&] {
    for (const auto& [id, t] : items) out[id] = Verdict::Excluded;
    return out;
  };
  if (items.size() < 3) return exclude();
  for (const auto& [id, t] : items)
    if (t < params.min_time_us || !(t > 0)) return exclude();

  const std::size_t n = items.size();
  std::size_t best_mask = 0;
  std::size_t best_size = 0;
  std::tuple<double, double, std::vector<std::string>> best_key;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < n; ++k)
      if (mask & (std::size_t{1} << k)) members.push_back(k);
    if (members.size() < 2) continue;
    bool ok = true;
    for (std::size_t a = 0; a < members.size() && ok; ++a)
      for (std::size_t b = a + 1; b < members.size() && ok; ++b) {
        const double x = items[members[a]].second;
        const double y = items[members[b]].second;
        ok = std::fabs(x - y) / std::min(x, y) <= params.alpha;
      }
    if (!ok) continue;
    std::vector<double> t;
    std::vector<std::string> ids;
    for (auto k : members) {
      t.push_back(items[k].second);
      ids.push_back(items[k].first);
    }
    std::sort(t.begin(), t.end());
    const double mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
    double dev = 0;
    for (double x : t) dev += std::fabs(x - mean);
    auto key = std::make_tuple(dev / static_cast<double>(t.size()) / mean, mean, ids);
    if (members.size() > best_size || (members.size() == best_size && key < best_key)) {
      best_size = members.size();
      best_mask = mask;
      best_key = key;
    }
  }
  if (best_size < 2) return exclude();
  const double m = std::get<1>(best_key);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& [id, t] = items[k];
    if (best_mask & (std::size_t{1} << k)) {
      out[id] = Verdict::None;
    } else if (t / m >= params.beta) {
      out[id] = Verdict::Slow;
    } else if (m / t >= params.beta) {
      out[id] = Verdict::Fast;
    } else {
      out[id] = Verdict::None;
    }
  }
  return out;
}

const std::vector<CorrectnessRow>& correctness_table() {
  constexpr auto O = RunStatus::Ok;
  constexpr auto C = RunStatus::Crash;
  constexpr auto H = RunStatus::Hang;
  constexpr auto N = Verdict::None;
  constexpr auto CO = Verdict::CrashOutlier;
  constexpr auto HO = Verdict::HangOutlier;
  static const std::vector<CorrectnessRow> table{
      {{O, O, O}, {N, N, N}, false},    {{O, O, C}, {N, N, CO}, false},   {{O, O, H}, {N, N, HO}, false},
      {{O, C, O}, {N, CO, N}, false},   {{O, C, C}, {N, CO, CO}, false},  {{O, C, H}, {N, CO, HO}, false},
      {{O, H, O}, {N, HO, N}, false},   {{O, H, C}, {N, HO, CO}, false},  {{O, H, H}, {N, HO, HO}, false},
      {{C, O, O}, {CO, N, N}, false},   {{C, O, C}, {CO, N, CO}, false},  {{C, O, H}, {CO, N, HO}, false},
      {{C, C, O}, {CO, CO, N}, false},  {{C, C, C}, {N, N, N}, true},     {{C, C, H}, {N, N, N}, true},
      {{C, H, O}, {CO, HO, N}, false},  {{C, H, C}, {N, N, N}, true},     {{C, H, H}, {N, N, N}, true},
      {{H, O, O}, {HO, N, N}, false},   {{H, O, C}, {HO, N, CO}, false},  {{H, O, H}, {HO, N, HO}, false},
      {{H, C, O}, {HO, CO, N}, false},  {{H, C, C}, {N, N, N}, true},     {{H, C, H}, {N, N, N}, true},
      {{H, H, O}, {HO, HO, N}, false},  {{H, H, C}, {N, N, N}, true},     {{H, H, H}, {N, N, N}, true},
  };
  return table;
}

}  // namespace support

namespace support {

namespace {

void count_expr(const ompfuzz::Expression& e, Features& f) {
  using namespace ompfuzz;
  if (const auto* p = std::get_if<Paren>(&e.node)) {
    count_expr(*p->inner, f);
  } else if (const auto* b = std::get_if<BinOp>(&e.node)) {
    count_expr(*b->lhs, f);
    count_expr(*b->rhs, f);
  } else if (const auto* m = std::get_if<MathCall>(&e.node)) {
    ++f.math_call;
    count_expr(*m->arg, f);
  }
}

void count_block(const ompfuzz::Block& b, Features& f, int for_depth) {
  using namespace ompfuzz;
  for (const auto& s : b.statements) {
    if (const auto* a = as<Assignment>(s)) {
      ++f.assignments;
      count_expr(a->expr, f);
    } else if (const auto* d = as<TempDecl>(s)) {
      count_expr(d->init, f);
    } else if (const auto* i = as<IfBlock>(s)) {
      ++f.if_block;
      count_expr(i->cond.rhs, f);
      count_block(i->body, f, for_depth);
    } else if (const auto* l = as<ForLoop>(s)) {
      if (l->omp_for) ++f.omp_for;
      f.max_for_depth = std::max(f.max_for_depth, for_depth + 1);
      count_block(l->body, f, for_depth + 1);
    } else if (const auto* r = as<OmpParallel>(s)) {
      ++f.parallel;
      if (r->reduction) ++f.reduction;
      count_block(r->body, f, for_depth);
    } else if (const auto* c = as<Critical>(s)) {
      ++f.critical;
      count_block(c->body, f, for_depth);
    }
  }
}

}  // namespace

Features features(const ompfuzz::Program& p) {
  Features f;
  count_block(p.body, f, 0);
  return f;
}

}  // namespace support
