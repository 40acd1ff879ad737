#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ompfuzz/ast.hpp"
#include "ompfuzz/rng.hpp"

namespace ompfuzz {

enum class FpClass { Normal, Subnormal, AlmostInfinity, AlmostSubnormal, ZeroPositive, ZeroNegative };

inline constexpr std::array kAllFpClasses{FpClass::Normal,          FpClass::Subnormal,
                                          FpClass::AlmostInfinity,  FpClass::AlmostSubnormal,
                                          FpClass::ZeroPositive,    FpClass::ZeroNegative};

std::string_view to_string(FpClass c);

/// Class membership test. decades is the band width used for the two
/// near-boundary classes.
bool in_class(double v, FpClass c, double decades = 1.0);
bool in_class(float v, FpClass c, double decades = 1.0);

double gen_double(FpClass c, Rng& rng, double decades = 1.0);
float gen_float(FpClass c, Rng& rng, double decades = 1.0);

struct InputValue {
  std::string param;
  ParamKind kind = ParamKind::FpScalar;
  Precision precision = Precision::Double;
  FpClass fp_class = FpClass::Normal;  // meaningless for IntScalar
  double value = 0.0;                  // exact (float values widen losslessly)
  int int_value = 0;
};

struct InputSample {
  int sample_id = 0;
  std::vector<InputValue> values;
};

/// One value per parameter of program, in declaration order. Integer
/// parameters are uniform in [1, array_size]; fp classes are uniform over
/// kAllFpClasses.
InputSample gen_input_sample(const Program& program, int array_size, double decades, Rng& rng, int sample_id = 0);

/// argv tokens: decimal integers and C99 hexfloat ("%a") reals, one per
/// parameter (an array contributes its fill value).
std::vector<std::string> serialize_input(const InputSample& sample);

std::string format_double_token(double v);
/// Parses a token produced by serialize_input. Throws std::invalid_argument.
double parse_fp_token(std::string_view token, Precision precision);
int parse_int_token(std::string_view token);

/// Text of a .inputs file: one line per sample.
std::string format_inputs_file(const std::vector<InputSample>& samples);
/// Token lines of a .inputs file. Throws std::runtime_error when unreadable.
std::vector<std::vector<std::string>> read_inputs_file(const std::filesystem::path& path);

}  // namespace ompfuzz
