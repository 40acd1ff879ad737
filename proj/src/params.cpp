#include "ompfuzz/params.hpp"

#include <cmath>
#include <set>

namespace ompfuzz {

std::vector<std::string> default_math_functions() {
  // Unary and defined for every real argument, so no domain errors.
  return {"sin", "cos", "exp", "fabs", "cbrt", "atan", "tanh"};
}

namespace {

const std::set<std::string, std::less<>>& known_math_functions() {
  static const std::set<std::string, std::less<>> names{"sin",  "cos",   "tan",  "exp",  "fabs", "cbrt",
                                                        "atan", "tanh",  "sinh", "cosh", "asinh", "erf",
                                                        "erfc", "floor", "ceil", "trunc", "round"};
  return names;
}

void require_positive(const std::string& field, long long value) {
  if (value <= 0) throw ParamError(field, "must be positive, got " + std::to_string(value));
}

void require_non_negative(const std::string& field, long long value) {
  if (value < 0) throw ParamError(field, "must be non-negative, got " + std::to_string(value));
}

}  // namespace

void GeneratorParams::validate() const {
  require_positive("max_expression_size", max_expression_size);
  require_non_negative("max_nesting_levels", max_nesting_levels);
  require_positive("max_lines_in_block", max_lines_in_block);
  require_positive("array_size", array_size);
  require_non_negative("max_same_level_blocks", max_same_level_blocks);
  require_positive("input_samples_per_run", input_samples_per_run);
  require_positive("num_threads", num_threads);
  require_positive("max_params", max_params);
  if (!(math_func_probability >= 0.0 && math_func_probability <= 1.0))
    throw ParamError("math_func_probability", "must lie in [0, 1]");
  if (!math_func_allowed && math_func_probability != 0.0)
    throw ParamError("math_func_probability", "must be 0 when math_func_allowed is false");
  if (math_func_allowed && math_functions.empty())
    throw ParamError("math_functions", "must be non-empty when math_func_allowed is true");
  for (const auto& f : math_functions) {
    if (!known_math_functions().contains(f))
      throw ParamError("math_functions", "unsupported function '" + f + "'");
  }
  // thread_id subscripts must stay inside every array.
  if (num_threads > array_size) throw ParamError("num_threads", "must not exceed array_size");
  if (!(near_boundary_decades > 0.0 && near_boundary_decades <= 30.0))
    throw ParamError("near_boundary_decades", "must lie in (0, 30]");
}

GeneratorParams evaluation_params(int num_threads, std::uint64_t seed) {
  GeneratorParams p;
  p.max_expression_size = 5;
  p.max_nesting_levels = 3;
  p.max_lines_in_block = 10;
  p.array_size = 1000;
  p.max_same_level_blocks = 3;
  p.math_func_allowed = true;
  p.math_func_probability = 0.01;
  p.input_samples_per_run = 3;
  p.num_threads = num_threads;
  p.rng_seed = seed;
  return p;
}

}  // namespace ompfuzz
