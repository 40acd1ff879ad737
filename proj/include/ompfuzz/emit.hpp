#pragma once

#include <stdexcept>
#include <string>

#include "ompfuzz/ast.hpp"
#include "ompfuzz/params.hpp"

namespace ompfuzz {

class EmitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Complete C++/OpenMP translation unit: the compute kernel plus a main that
/// parses one positional argument per parameter, fills arrays with their
/// seed value, times the kernel call in microseconds and prints
///   comp=<%.17g value>
///   time_us=<integer>
/// num_threads clauses use params.num_threads. Throws EmitError when the
/// program does not validate.
std::string emit_source(const Program& program, const GeneratorParams& params);

/// Just the expression text, as it appears in emitted code.
std::string emit_expression(const Expression& e);

}  // namespace ompfuzz
