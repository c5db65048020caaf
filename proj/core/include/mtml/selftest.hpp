#pragma once

#include <ostream>

namespace mtml {

/// Quick invariant checks on a tiny configuration (channel statistics,
/// equalizer inversion, power constraint, dimension arithmetic, loss values,
/// unit-gate and fusion degeneracies). Prints one line per check.
/// Returns true when every check passes.
bool run_selftest(std::ostream& out);

}  // namespace mtml
