#include "ompfuzz/config.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace ompfuzz {

namespace fs = std::filesystem;
using nlohmann::json;

ConfigErrors::ConfigErrors(std::vector<std::string> errors)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

namespace {

class Reader {
 public:
  std::vector<std::string> errors;

  void known_keys(const json& obj, const std::string& section, std::initializer_list<const char*> keys) {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
      if (!allowed.contains(k)) errors.push_back(section + "." + k + ": unknown field");
  }

  template <typename T>
  void get(const json& obj, const std::string& section, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
      const json& v = obj.at(key);
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      errors.push_back(section + "." + key + ": " + e.what());
    }
  }
};

}  // namespace

ResolvedConfig parse_config(const std::string& text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigErrors({std::string("not valid JSON: ") + e.what()});
  }
  if (!root.is_object()) throw ConfigErrors({"top level must be an object"});

  Reader rd;
  ResolvedConfig cfg;
  rd.known_keys(root, "config", {"toolchains", "generator", "campaign", "analysis"});

  if (!root.contains("toolchains")) {
    rd.errors.emplace_back("toolchains: missing section");
  } else if (!root["toolchains"].is_array()) {
    rd.errors.emplace_back("toolchains: must be a list");
  } else {
    int k = 0;
    for (const auto& t : root["toolchains"]) {
      const std::string where = "toolchains[" + std::to_string(k++) + "]";
      if (!t.is_object()) {
        rd.errors.push_back(where + ": must be an object");
        continue;
      }
      rd.known_keys(t, where, {"id", "command", "flags", "env"});
      ToolchainSpec tc;
      rd.get(t, where, "id", tc.id);
      rd.get(t, where, "command", tc.command);
      rd.get(t, where, "flags", tc.flags);
      rd.get(t, where, "env", tc.env);
      try {
        tc.validate();
      } catch (const ConfigError& e) {
        rd.errors.push_back(where + ": " + e.what());
      }
      cfg.campaign.toolchains.push_back(std::move(tc));
    }
    if (cfg.campaign.toolchains.size() < 2)
      rd.errors.push_back("toolchains: differential testing needs at least 2, got " +
                          std::to_string(cfg.campaign.toolchains.size()));
    std::set<std::string> ids;
    for (const auto& tc : cfg.campaign.toolchains)
      if (!tc.id.empty() && !ids.insert(tc.id).second) rd.errors.push_back("toolchains: duplicate id '" + tc.id + "'");
  }

  auto& g = cfg.campaign.generator;
  if (root.contains("generator")) {
    const json& s = root["generator"];
    const std::string sec = "generator";
    rd.known_keys(s, sec,
                  {"max_expression_size", "max_nesting_levels", "max_lines_in_block", "array_size",
                   "max_same_level_blocks", "math_func_allowed", "math_func_probability", "input_samples_per_run",
                   "num_threads", "seed", "max_params", "math_functions", "near_boundary_decades"});
    rd.get(s, sec, "max_expression_size", g.max_expression_size);
    rd.get(s, sec, "max_nesting_levels", g.max_nesting_levels);
    rd.get(s, sec, "max_lines_in_block", g.max_lines_in_block);
    rd.get(s, sec, "array_size", g.array_size);
    rd.get(s, sec, "max_same_level_blocks", g.max_same_level_blocks);
    rd.get(s, sec, "math_func_allowed", g.math_func_allowed);
    rd.get(s, sec, "math_func_probability", g.math_func_probability);
    rd.get(s, sec, "input_samples_per_run", g.input_samples_per_run);
    rd.get(s, sec, "num_threads", g.num_threads);
    rd.get(s, sec, "seed", g.rng_seed);
    rd.get(s, sec, "max_params", g.max_params);
    rd.get(s, sec, "math_functions", g.math_functions);
    rd.get(s, sec, "near_boundary_decades", g.near_boundary_decades);
    if (!s.contains("num_threads")) rd.errors.emplace_back("generator.num_threads: required");
  } else {
    rd.errors.emplace_back("generator: missing section");
  }

  auto& c = cfg.campaign;
  if (root.contains("campaign")) {
    const json& s = root["campaign"];
    const std::string sec = "campaign";
    rd.known_keys(s, sec,
                  {"groups", "tests_per_group", "inputs_per_test", "timeout_seconds", "compile_timeout_seconds",
                   "repetitions", "compile_jobs", "directory"});
    rd.get(s, sec, "groups", c.n_groups);
    rd.get(s, sec, "tests_per_group", c.tests_per_group);
    if (s.contains("inputs_per_test")) {
      int n = 0;
      rd.get(s, sec, "inputs_per_test", n);
      if (root.contains("generator") && root["generator"].contains("input_samples_per_run") &&
          n != g.input_samples_per_run) {
        rd.errors.emplace_back("campaign.inputs_per_test: disagrees with generator.input_samples_per_run");
      } else {
        g.input_samples_per_run = n;
      }
    }
    rd.get(s, sec, "timeout_seconds", c.timeout_seconds);
    rd.get(s, sec, "compile_timeout_seconds", c.compile_timeout_seconds);
    rd.get(s, sec, "repetitions", c.repetitions);
    rd.get(s, sec, "compile_jobs", c.compile_jobs);
    std::string dir;
    rd.get(s, sec, "directory", dir);
    if (!dir.empty()) c.directory = dir;
  }
  if (c.directory.is_relative() && !base_dir.empty()) c.directory = base_dir / c.directory;

  auto& a = cfg.analysis;
  if (root.contains("analysis")) {
    const json& s = root["analysis"];
    const std::string sec = "analysis";
    rd.known_keys(s, sec, {"alpha", "beta", "min_time_us", "numeric_rel_tol", "exclude_numeric_mismatch"});
    rd.get(s, sec, "alpha", a.alpha);
    rd.get(s, sec, "beta", a.beta);
    rd.get(s, sec, "min_time_us", a.min_time_us);
    rd.get(s, sec, "numeric_rel_tol", a.numeric_rel_tol);
    rd.get(s, sec, "exclude_numeric_mismatch", a.exclude_numeric_mismatch);
  }

  auto check = [&](auto&& fn) {
    std::string msg;
    try {
      fn();
      return;
    } catch (const ParamError& e) {
      msg = "generator." + std::string(e.what());
    } catch (const std::exception& e) {
      msg = e.what();
    }
    if (std::find(rd.errors.begin(), rd.errors.end(), msg) == rd.errors.end()) rd.errors.push_back(msg);
  };
  check([&] { c.validate(); });
  check([&] { a.validate(); });
  if (!rd.errors.empty()) throw ConfigErrors(rd.errors);
  return cfg;
}

ResolvedConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigErrors({"cannot read config file " + path.string()});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string describe_config(const ResolvedConfig& cfg) {
  const auto& c = cfg.campaign;
  const auto& g = c.generator;
  const auto& a = cfg.analysis;
  json tcs = json::array();
  for (const auto& t : c.toolchains) tcs.push_back({{"id", t.id}, {"command", t.command}, {"flags", t.flags}, {"env", t.env}});
  json j{{"toolchains", tcs},
         {"generator",
          {{"max_expression_size", g.max_expression_size},
           {"max_nesting_levels", g.max_nesting_levels},
           {"max_lines_in_block", g.max_lines_in_block},
           {"array_size", g.array_size},
           {"max_same_level_blocks", g.max_same_level_blocks},
           {"math_func_allowed", g.math_func_allowed},
           {"math_func_probability", g.math_func_probability},
           {"input_samples_per_run", g.input_samples_per_run},
           {"num_threads", g.num_threads},
           {"seed", g.rng_seed},
           {"max_params", g.max_params},
           {"math_functions", g.math_functions},
           {"near_boundary_decades", g.near_boundary_decades}}},
         {"campaign",
          {{"groups", c.n_groups},
           {"tests_per_group", c.tests_per_group},
           {"inputs_per_test", c.inputs_per_test()},
           {"timeout_seconds", c.timeout_seconds},
           {"compile_timeout_seconds", c.compile_timeout_seconds},
           {"repetitions", c.repetitions},
           {"compile_jobs", c.compile_jobs},
           {"directory", c.directory.string()},
           {"expected_records", c.expected_records()}}},
         {"analysis",
          {{"alpha", a.alpha},
           {"beta", a.beta},
           {"min_time_us", a.min_time_us},
           {"numeric_rel_tol", a.numeric_rel_tol},
           {"exclude_numeric_mismatch", a.exclude_numeric_mismatch}}}};
  return j.dump(2);
}

}  // namespace ompfuzz
