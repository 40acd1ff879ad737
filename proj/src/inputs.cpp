#include "ompfuzz/inputs.hpp"

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ompfuzz {

std::string_view to_string(FpClass c) {
  switch (c) {
    case FpClass::Normal: return "normal";
    case FpClass::Subnormal: return "subnormal";
    case FpClass::AlmostInfinity: return "almost-infinity";
    case FpClass::AlmostSubnormal: return "almost-subnormal";
    case FpClass::ZeroPositive: return "zero-positive";
    case FpClass::ZeroNegative: return "zero-negative";
  }
  return "?";
}

namespace {

template <typename T>
struct Bits;
template <>
struct Bits<double> {
  using U = std::uint64_t;
  static constexpr int kMantissa = 52;
};
template <>
struct Bits<float> {
  using U = std::uint32_t;
  static constexpr int kMantissa = 23;
};

template <typename T>
T upper_band(double decades) {
  return std::numeric_limits<T>::max() / std::pow(T(10), static_cast<T>(decades));
}

template <typename T>
T lower_band(double decades) {
  return std::numeric_limits<T>::min() * std::pow(T(10), static_cast<T>(decades));
}

template <typename T>
bool in_class_impl(T v, FpClass c, double decades) {
  const T a = std::fabs(v);
  switch (c) {
    case FpClass::Normal: return std::fpclassify(v) == FP_NORMAL;
    case FpClass::Subnormal: return std::fpclassify(v) == FP_SUBNORMAL;
    case FpClass::AlmostInfinity: return std::fpclassify(v) == FP_NORMAL && a >= upper_band<T>(decades);
    case FpClass::AlmostSubnormal: return std::fpclassify(v) == FP_NORMAL && a <= lower_band<T>(decades);
    case FpClass::ZeroPositive: return v == T(0) && !std::signbit(v);
    case FpClass::ZeroNegative: return v == T(0) && std::signbit(v);
  }
  return false;
}

template <typename T>
T gen_impl(FpClass c, Rng& rng, double decades) {
  using U = typename Bits<T>::U;
  constexpr int kM = Bits<T>::kMantissa;
  const bool negative = rng.bernoulli(0.5);
  T mag = T(0);
  switch (c) {
    case FpClass::ZeroPositive: return T(0);
    case FpClass::ZeroNegative: return -T(0);
    case FpClass::Normal: {
      // Log-uniform: uniform binade, then 2^u inside it.
      const int lo = std::numeric_limits<T>::min_exponent - 1;
      const int hi = std::numeric_limits<T>::max_exponent - 1;
      const int e = static_cast<int>(rng.uniform_int(lo, hi));
      mag = std::ldexp(std::exp2(static_cast<T>(rng.uniform01())), e);
      if (!(mag < std::numeric_limits<T>::infinity())) mag = std::numeric_limits<T>::max();
      if (mag < std::numeric_limits<T>::min()) mag = std::numeric_limits<T>::min();
      break;
    }
    case FpClass::Subnormal: {
      const U mantissa = static_cast<U>(rng.uniform_int(1, (std::int64_t{1} << kM) - 1));
      mag = std::bit_cast<T>(mantissa);
      break;
    }
    case FpClass::AlmostInfinity: {
      const T floor = upper_band<T>(decades);
      mag = std::numeric_limits<T>::max() / std::pow(T(10), static_cast<T>(decades * rng.uniform01()));
      if (mag < floor) mag = floor;
      break;
    }
    case FpClass::AlmostSubnormal: {
      const T ceil = lower_band<T>(decades);
      mag = std::numeric_limits<T>::min() * std::pow(T(10), static_cast<T>(decades * rng.uniform01()));
      if (mag > ceil) mag = ceil;
      if (mag < std::numeric_limits<T>::min()) mag = std::numeric_limits<T>::min();
      break;
    }
  }
  return negative ? -mag : mag;
}

}  // namespace

bool in_class(double v, FpClass c, double decades) { return in_class_impl(v, c, decades); }
bool in_class(float v, FpClass c, double decades) { return in_class_impl(v, c, decades); }

double gen_double(FpClass c, Rng& rng, double decades) { return gen_impl<double>(c, rng, decades); }
float gen_float(FpClass c, Rng& rng, double decades) { return gen_impl<float>(c, rng, decades); }

InputSample gen_input_sample(const Program& program, int array_size, double decades, Rng& rng, int sample_id) {
  InputSample sample;
  sample.sample_id = sample_id;
  for (const auto& p : program.params) {
    InputValue v;
    v.param = p.name;
    v.kind = p.kind;
    v.precision = p.precision;
    if (p.kind == ParamKind::IntScalar) {
      v.int_value = static_cast<int>(rng.uniform_int(1, array_size));
      v.value = v.int_value;
    } else {
      v.fp_class = kAllFpClasses[rng.index(kAllFpClasses.size())];
      v.value = p.precision == Precision::Single ? static_cast<double>(gen_float(v.fp_class, rng, decades))
                                                 : gen_double(v.fp_class, rng, decades);
    }
    sample.values.push_back(std::move(v));
  }
  return sample;
}

std::string format_double_token(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::vector<std::string> serialize_input(const InputSample& sample) {
  std::vector<std::string> out;
  out.reserve(sample.values.size());
  for (const auto& v : sample.values) {
    out.push_back(v.kind == ParamKind::IntScalar ? std::to_string(v.int_value) : format_double_token(v.value));
  }
  return out;
}

double parse_fp_token(std::string_view token, Precision precision) {
  const std::string text(token);
  char* end = nullptr;
  errno = 0;
  const double v = precision == Precision::Single ? static_cast<double>(std::strtof(text.c_str(), &end))
                                                  : std::strtod(text.c_str(), &end);
  // ERANGE is expected for subnormals and is not an error here.
  if (text.empty() || end != text.c_str() + text.size())
    throw std::invalid_argument("not a floating-point token: '" + text + "'");
  return v;
}

int parse_int_token(std::string_view token) {
  const std::string text(token);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE ||
      v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw std::invalid_argument("not an integer token: '" + text + "'");
  return static_cast<int>(v);
}

std::string format_inputs_file(const std::vector<InputSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    const auto tokens = serialize_input(s);
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (k) out += ' ';
      out += tokens[k];
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<std::string>> read_inputs_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read inputs file " + path.string());
  std::vector<std::vector<std::string>> lines;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(t);
    lines.push_back(std::move(tokens));
  }
  return lines;
}

}  // namespace ompfuzz
