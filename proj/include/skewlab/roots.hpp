#pragma once

#include <vector>

#include "skewlab/complex.hpp"
#include "skewlab/fiber_poly.hpp"

namespace skewlab {

/// All deg(p) roots (with multiplicity) by Aberth-Ehrlich simultaneous
/// iteration, followed by a Newton polish of each root.
/// Throws NonConvergence after `max_sweeps` sweeps without meeting the
/// residual target.
std::vector<Cplx> aberth_roots(const FiberPoly& p, int max_sweeps = 500);

/// Newton refinement of a single root; returns the improved value (best
/// residual seen), capped at `max_steps` steps.
Cplx newton_polish(const FiberPoly& p, Cplx z0, int max_steps = 50);

/// Group near-identical roots: returns (representative, multiplicity)
/// pairs, clusters formed greedily at distance <= tol, representatives
/// are cluster means sorted by (re, im).
std::vector<std::pair<Cplx, int>> cluster_roots(const std::vector<Cplx>& roots,
                                                double tol);

}  // namespace skewlab
