#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>

#include "ompfuzz/ast.hpp"
#include "ompfuzz/params.hpp"
#include "ompfuzz/rng.hpp"

namespace ompfuzz {

enum class SharingAttr { Shared, Private, FirstPrivate, Reduction };
std::string_view to_string(SharingAttr a);

using DataSharing = std::map<std::string, SharingAttr, std::less<>>;

enum class VisibleKind { Comp, IntScalar, FpScalar, FpArray, LoopIndex };

struct VisibleVar {
  std::string name;
  VisibleKind kind;
};

/// Assigns a data-sharing attribute to every variable visible at a parallel
/// region. comp is shared, or reduction when the region carries one; loop
/// indices stay shared; fp scalars are drawn uniformly from
/// {shared, private, firstprivate}; integer scalars and array pointers from
/// {shared, firstprivate} (a private pointer or trip count would be
/// uninitialised). At most max_private variables become private; the
/// surplus is demoted to firstprivate so the region prologue can initialise
/// every private copy within the block line limit.
DataSharing assign_data_sharing(const OmpParallel& region, std::span<const VisibleVar> visible, Rng& rng,
                                int max_private);

/// The attribute map implied by a region's clause lists.
DataSharing region_data_sharing(const OmpParallel& region, std::span<const VisibleVar> visible);

/// Builds a random OpenMP test program. Deterministic in params (including
/// rng_seed). Throws ParamError for invalid params. The result has already
/// been passed through enforce_race_freedom.
Program generate_program(const GeneratorParams& params);

}  // namespace ompfuzz
