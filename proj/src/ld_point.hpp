#pragma once

#include "ldaction/ld.hpp"

namespace ldaction::detail {

/// Forward and backward branches from one seed. Inputs are assumed
/// validated. `path` is null for deterministic runs.
LDValue evaluate_point(const SystemSpec& sys, const PhaseState& x0, const LDParams& params,
                       const WienerPath* path);

}  // namespace ldaction::detail
