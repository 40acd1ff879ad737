#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ompfuzz {

/// Thrown when a parameter set violates its invariants. field() names the
/// offending field using the config-file key.
class ParamError : public std::invalid_argument {
 public:
  ParamError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

std::vector<std::string> default_math_functions();

struct GeneratorParams {
  int max_expression_size = 5;
  int max_nesting_levels = 3;
  int max_lines_in_block = 10;
  int array_size = 1000;
  int max_same_level_blocks = 3;
  bool math_func_allowed = true;
  double math_func_probability = 0.01;
  int input_samples_per_run = 3;
  int num_threads = 0;  // no default; configs must state it
  std::uint64_t rng_seed = 0;

  // Knobs outside the classic Varity set.
  int max_params = 5;
  std::vector<std::string> math_functions = default_math_functions();
  double near_boundary_decades = 1.0;  // width of the almost-inf / almost-subnormal bands

  /// Throws ParamError on the first violated invariant.
  void validate() const;
};

/// The generator configuration used for the published evaluation campaign.
GeneratorParams evaluation_params(int num_threads, std::uint64_t seed);

}  // namespace ompfuzz
