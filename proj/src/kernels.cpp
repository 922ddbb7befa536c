#include "gsid/kernels.hpp"

#include <omp.h>

#include <vector>

namespace gsid {

namespace {

double cell_cost(const SystemSpec& spec, std::span<const double> x, const ResidualLog& log) {
  const std::size_t m = static_cast<std::size_t>(log.m);
  double s = 0.0;
  for (std::size_t k = 0; k < log.active_target.size(); ++k) {
    const std::span<const double> phi(log.active_phi.data() + k * m, m);
    const double r = evaluate_model(spec, x, phi) - log.active_target[k];
    s += r * r;
  }
  return s;
}

}  // namespace

void cost_serial(const SystemSpec& spec, const GridSpec& grid, const ResidualLog& log, std::span<double> out) {
  std::vector<double> x(grid.cells.size());
  const std::int64_t cells = grid.count();
  for (std::int64_t i = 0; i < cells; ++i) {
    grid.center(i, x);
    out[static_cast<std::size_t>(i)] = cell_cost(spec, x, log);
  }
}

void cost_parallel(const SystemSpec& spec, const GridSpec& grid, const ResidualLog& log, std::span<double> out) {
  const std::int64_t cells = grid.count();
#pragma omp parallel
  {
    std::vector<double> x(grid.cells.size());
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < cells; ++i) {
      grid.center(i, x);
      out[static_cast<std::size_t>(i)] = cell_cost(spec, x, log);
    }
  }
}

Selection select_exhaustive(const SystemSpec& spec, const GridSpec& theta_grid, const GridSpec& sigma_grid,
                            const ResidualLog& log, std::int64_t eta, double threshold) {
  const std::int64_t ni = theta_grid.count();
  const std::int64_t nj = sigma_grid.count();
  Selection sel;
  for (std::int64_t j = 0; j < nj; ++j) {
    const double sigma2 = sigma_grid.center_1d(0, j);
    for (std::int64_t i = 0; i < ni; ++i) {
      const auto x = theta_grid.center(i);
      if (std::abs(g_hat(spec, x, sigma2, log, eta)) <= threshold) {
        ++sel.feasible_count;
        if (sel.j_star < 0) {
          sel.j_star = j;
          sel.i_star = i;
        }
      }
    }
  }
  return sel;
}

}  // namespace gsid
