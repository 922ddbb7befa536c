#pragma once

#include <span>

#include "gsid/estimator.hpp"
#include "gsid/system.hpp"

namespace gsid {

// Cost kernels: S(o_i) = sum over active log entries of (f(o_i, phi) - target)^2
// for every theta-grid cell i. Both variants sum each cell in log order, so
// their outputs are bit-identical.

void cost_serial(const SystemSpec& spec, const GridSpec& grid, const ResidualLog& log, std::span<double> out);

/// OpenMP over grid cells.
void cost_parallel(const SystemSpec& spec, const GridSpec& grid, const ResidualLog& log, std::span<double> out);

/// Exhaustive reference for one evaluation: every (i, j) pair is scored with
/// g_hat directly and J_t is scanned in (j, i) order. Cost O(cells_theta *
/// cells_sigma * t); use only on small instances.
Selection select_exhaustive(const SystemSpec& spec, const GridSpec& theta_grid, const GridSpec& sigma_grid,
                            const ResidualLog& log, std::int64_t eta, double threshold);

}  // namespace gsid
