#pragma once

#include <stdexcept>

#include "ompfuzz/ast.hpp"

namespace ompfuzz {

/// A shared write inside a parallel region that none of the protection
/// rules can cover. Indicates a generator bug.
class RaceError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Rewrites every parallel region so each write to shared data is either an
/// array store indexed by thread_id, an update of comp covered by the
/// region's reduction clause, or enclosed in a critical section. Statements
/// reading a shared scalar that the region also writes are protected the
/// same way. Idempotent.
Program enforce_race_freedom(Program program);

}  // namespace ompfuzz
