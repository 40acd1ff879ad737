#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ompfuzz/ast.hpp"
#include "ompfuzz/params.hpp"

namespace ompfuzz {

enum class Rule {
  UndeclaredIdentifier,
  DuplicateDeclaration,
  TypeMismatch,
  NestingDepth,
  BlockLines,
  SiblingBlocks,
  EmptyBlock,
  ExpressionSize,
  MathCall,
  LoopBound,
  Subscript,
  OmpForPlacement,
  NestedParallel,
  ParallelShape,
  CriticalPlacement,
  Clause,
  PrivateUninitialized,
  ReductionUpdate,
  UnprotectedWrite,
  UnprotectedRead,
  IterationDependence,
  ArrayWrite,
  ScratchArrayRead,
  Params,
};

std::string_view to_string(Rule r);

struct Violation {
  Rule rule;
  std::string location;  // e.g. "body[3].for.body[0]"
  std::string message;
};

/// Every invariant violation in program, checked against params' limits.
/// Empty means the program is accepted.
std::vector<Violation> validate_program(const Program& program, const GeneratorParams& params);

std::string format_violations(const std::vector<Violation>& violations);

}  // namespace ompfuzz
