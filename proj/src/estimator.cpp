#include "gsid/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "gsid/kernels.hpp"

namespace gsid {

bool EvaluationSchedule::is_evaluation_time(std::int64_t t) const {
  if (kind == Kind::EveryStep || t <= dense_until) return true;
  for (int k = 1;; ++k) {
    const double v = std::ceil(static_cast<double>(dense_until) * std::pow(ratio, k));
    if (v >= static_cast<double>(t)) return v == static_cast<double>(t);
  }
}

void EstimatorConfig::validate() const {
  if (!(kappa > 4.0)) throw ConfigError("estimator.kappa must be > 4");
  const double lambda_max = 0.25 - 0.5 / kappa;
  if (!(lambda > 0.0 && lambda < lambda_max)) {
    throw ConfigError("estimator.lambda must lie in (0, " + format_double(lambda_max) + ")");
  }
  if (!(gamma > 0.0)) throw ConfigError("estimator.gamma must be > 0");
  if (!(C > 0.0)) throw ConfigError("estimator.C must be > 0");
  if (scenario.kind == SigmaScenario::Kind::BoundedBy && !(scenario.value > 0.0)) {
    throw ConfigError("estimator.scenario: bounded_by needs sigma > 0");
  }
  if (scenario.kind == SigmaScenario::Kind::Known && !(scenario.value >= 0.0)) {
    throw ConfigError("estimator.scenario: known variance must be >= 0");
  }
  if (schedule.kind == EvaluationSchedule::Kind::Geometric && !(schedule.ratio > 1.0)) {
    throw ConfigError("estimator.schedule: geometric ratio must be > 1");
  }
  if (schedule.dense_until < 1) throw ConfigError("estimator.schedule: dense_until must be >= 1");
  if (!(c_phi_safety >= 1.0)) throw ConfigError("estimator.c_phi_safety must be >= 1");
  if (c_phi_lattice < 2) throw ConfigError("estimator.c_phi_lattice must be >= 2");
}

// ---------------------------------------------------------------------------

std::int64_t GridSpec::count() const {
  std::int64_t c = 1;
  for (auto k : cells) c *= k;
  return c;
}

void GridSpec::center(std::int64_t flat, std::span<double> out) const {
  for (std::size_t d = cells.size(); d-- > 0;) {
    const std::int64_t k = flat % cells[d];
    flat /= cells[d];
    out[d] = center_1d(d, k);
  }
}

std::vector<double> GridSpec::center(std::int64_t flat) const {
  std::vector<double> c(cells.size());
  center(flat, c);
  return c;
}

std::vector<std::vector<double>> GridSpec::centers() const {
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(count()));
  for (std::int64_t i = 0; i < count(); ++i) out.push_back(center(i));
  return out;
}

std::int64_t GridSpec::cell_of(std::span<const double> p) const {
  std::int64_t flat = 0;
  for (std::size_t d = 0; d < cells.size(); ++d) {
    std::int64_t k = 0;
    if (widths[d] > 0.0) {
      k = static_cast<std::int64_t>(std::floor((p[d] - box.lower[d]) / widths[d]));
      k = std::clamp<std::int64_t>(k, 0, cells[d] - 1);
    }
    flat = flat * cells[d] + k;
  }
  return flat;
}

double GridSpec::max_width() const {
  double w = 0.0;
  for (double x : widths) w = std::max(w, x);
  return w;
}

GridSpec build_grid(const Box& box, double side_bound) {
  if (!(side_bound > 0.0)) throw ConfigError("build_grid: side bound must be > 0");
  GridSpec g;
  g.box = box;
  g.side_bound = side_bound;
  for (std::size_t d = 0; d < box.dims(); ++d) {
    const double side = box.side(d);
    if (!(side > 0.0)) {
      g.cells.push_back(1);
      g.widths.push_back(0.0);
      continue;
    }
    const double raw = std::ceil(side / side_bound);
    if (raw > 1e9) throw CapExceeded("build_grid: more than 1e9 cells in one dimension", static_cast<std::size_t>(raw));
    auto k = std::max<std::int64_t>(1, static_cast<std::int64_t>(raw));
    while (side / static_cast<double>(k) > side_bound) ++k;
    g.cells.push_back(k);
    g.widths.push_back(side / static_cast<double>(k));
  }
  return g;
}

Box sigma_domain(std::int64_t t, const SigmaScenario& scenario) {
  switch (scenario.kind) {
    case SigmaScenario::Kind::Known:
      return Box::interval(scenario.value, scenario.value);
    case SigmaScenario::Kind::UnboundedGrowing:
      return Box::interval(0.0, static_cast<double>(t));
    case SigmaScenario::Kind::BoundedBy:
      return Box::interval(0.0, scenario.value);
  }
  return {};
}

bool omega_indicator(double norm_lagged, double norm_current, const IndicatorParams& p) {
  if (!(norm_lagged <= p.C)) return false;
  if (std::isinf(p.c_w)) return norm_current <= p.gamma;
  return true;
}

bool omega_indicator(const Trajectory& traj, std::int64_t i, const IndicatorParams& p) {
  if (i < traj.m) return false;
  const auto lagged = traj.regressor(i - traj.m);
  const auto current = traj.regressor(i);
  return omega_indicator(euclidean_norm(lagged), euclidean_norm(current), p);
}

double c_phi(const SystemSpec& spec, double gamma, CPhiOptions opt) {
  const int n = spec.n();
  const int m = spec.m();
  const int L = std::max(2, opt.lattice);
  const Box& theta = spec.theta_box();
  std::vector<double> x(n), z(m), g(n);
  std::vector<int> ix(n, 0), iz(m, 0);
  double best = 0.0;

  auto lattice = [L](double lo, double hi, int k) { return lo + (hi - lo) * static_cast<double>(k) / (L - 1); };
  auto next = [L](std::vector<int>& idx) {
    for (std::size_t d = idx.size(); d-- > 0;) {
      if (++idx[d] < L) return true;
      idx[d] = 0;
    }
    return false;
  };

  do {
    for (int d = 0; d < m; ++d) z[d] = lattice(-gamma, gamma, iz[d]);
    if (euclidean_norm(z) > gamma * (1.0 + 1e-12)) continue;
    std::fill(ix.begin(), ix.end(), 0);
    do {
      for (int d = 0; d < n; ++d) x[d] = lattice(theta.lower[d], theta.upper[d], ix[d]);
      evaluate_gradient(spec, x, z, g);
      double s = 0.0;
      for (double v : g) s += v * v;
      if (!std::isfinite(s)) throw ConfigError("C_phi: gradient is not finite on Theta x B(0, gamma)");
      best = std::max(best, s);
    } while (next(ix));
  } while (next(iz));

  const double value = n * best * opt.safety / 4.0 + 1.0;
  if (!std::isfinite(value)) throw ConfigError("C_phi is not finite");
  return value;
}

void ResidualLog::push(std::span<const double> phi_i, double target_i, bool indicator) {
  phi.insert(phi.end(), phi_i.begin(), phi_i.end());
  target.push_back(target_i);
  active.push_back(indicator ? 1 : 0);
  if (indicator) {
    active_phi.insert(active_phi.end(), phi_i.begin(), phi_i.end());
    active_target.push_back(target_i);
  }
}

double g_hat(const SystemSpec& spec, std::span<const double> x, double x_prime, const ResidualLog& log,
             std::int64_t eta) {
  double s = 0.0;
  for (std::size_t k = 0; k < log.size(); ++k) {
    if (!log.active[k]) continue;
    const double r = evaluate_model(spec, x, log.regressor(k)) - log.target[k];
    s += r * r;
  }
  return s - static_cast<double>(eta) * x_prime;
}

// ---------------------------------------------------------------------------

Selection select_feasible(std::span<const double> costs, const GridSpec& sigma_grid, std::int64_t eta,
                          double threshold) {
  Selection sel;
  const std::int64_t N = sigma_grid.cells[0];
  const double w = sigma_grid.widths[0];
  const double L = sigma_grid.box.lower[0];
  const double eta_d = static_cast<double>(eta);

  for (std::size_t i = 0; i < costs.size(); ++i) {
    const double S = costs[i];
    auto P = [&](std::int64_t j) { return std::abs(S - eta_d * sigma_grid.center_1d(0, j)) <= threshold; };
    std::int64_t first = 0;
    std::int64_t last = N - 1;
    if (eta == 0 || w == 0.0) {
      // Either every sigma cell scores the same or there is a single cell.
      if (eta == 0 ? !(std::abs(S) <= threshold) : !P(0)) continue;
    } else {
      const double lo_val = (S - threshold) / eta_d;
      const double hi_val = (S + threshold) / eta_d;
      const double Nd = static_cast<double>(N - 1);
      first = static_cast<std::int64_t>(std::clamp(std::ceil((lo_val - L) / w - 0.5), 0.0, Nd));
      last = static_cast<std::int64_t>(std::clamp(std::floor((hi_val - L) / w - 0.5), 0.0, Nd));
      while (first > 0 && P(first - 1)) --first;
      if (!P(first)) {
        if (first + 1 < N && P(first + 1)) {
          ++first;
        } else {
          continue;
        }
      }
      if (last < first) last = first;
      while (last + 1 < N && P(last + 1)) ++last;
      while (last > first && !P(last)) --last;
    }
    sel.feasible_count += last - first + 1;
    if (sel.j_star < 0 || first < sel.j_star) {
      sel.j_star = first;
      sel.i_star = static_cast<std::int64_t>(i);
    }
  }
  return sel;
}

GsEstimator::GsEstimator(SystemSpec spec, EstimatorConfig config, double noise_support)
    : spec_(std::move(spec)), config_(config) {
  config_.validate();
  ind_ = IndicatorParams{config_.gamma, config_.C, noise_support};
  c_phi_ = c_phi(spec_, config_.gamma, CPhiOptions{config_.c_phi_lattice, config_.c_phi_safety});
  state_.theta_hat = spec_.theta_box().center();
  state_.sigma2_hat = sigma_domain(0, config_.scenario).center()[0];
  state_.residual_log.m = spec_.m();
  state_.indicators.push_back(0);
}

EstimateRecord GsEstimator::advance(const Trajectory& traj, bool force) {
  const std::int64_t t = state_.t + 1;
  if (traj.length() < t) throw ConfigError("estimator: trajectory shorter than t = " + std::to_string(t));
  if (traj.m != spec_.m()) throw ConfigError("estimator: trajectory regressor order differs from the model");
  if (t - 1 >= 1) {
    const std::int64_t i = t - 1;
    const auto phi = traj.regressor(i);
    state_.residual_log.push(phi, traj.y[i + 1] - traj.u[i], state_.indicators[i] != 0);
  }
  const bool ind_t = omega_indicator(traj, t, ind_);
  state_.indicators.push_back(ind_t ? 1 : 0);
  state_.eta += ind_t ? 1 : 0;
  state_.t = t;
  state_.evaluated = false;
  if (t >= 2 && (force || config_.schedule.is_evaluation_time(t))) evaluate(t);

  EstimateRecord rec;
  rec.t = t;
  rec.theta_hat = state_.theta_hat;
  rec.sigma2_hat = state_.sigma2_hat;
  rec.evaluated = state_.evaluated;
  if (state_.evaluated) {
    rec.feasible_count = state_.feasible_count;
    rec.threshold = state_.threshold;
    rec.theta_cell_side = state_.theta_grid.max_width();
    rec.sigma_cell_side = state_.sigma_grid.max_width();
    rec.i_star = state_.i_star;
    rec.j_star = state_.j_star;
  } else {
    rec.feasible_count = state_.feasible_count;
    rec.threshold = state_.threshold;
  }
  return rec;
}

void GsEstimator::evaluate(std::int64_t t) {
  const double td = static_cast<double>(t);
  state_.theta_grid = build_grid(spec_.theta_box(), std::pow(td, -config_.theta_side_exponent()));
  state_.sigma_grid = build_grid(sigma_domain(t, config_.scenario), std::pow(td, -config_.sigma_side_exponent()));
  state_.costs.assign(static_cast<std::size_t>(state_.theta_grid.count()), 0.0);
  if (config_.parallel) {
    cost_parallel(spec_, state_.theta_grid, state_.residual_log, state_.costs);
  } else {
    cost_serial(spec_, state_.theta_grid, state_.residual_log, state_.costs);
  }
  state_.threshold = c_phi_ * std::pow(td, config_.threshold_exponent());
  const Selection sel = select_feasible(state_.costs, state_.sigma_grid, state_.eta, state_.threshold);
  state_.feasible_count = sel.feasible_count;
  state_.i_star = sel.i_star;
  state_.j_star = sel.j_star;
  state_.evaluated = true;
  if (sel.feasible_count == 0) return;  // carry the previous estimates
  state_.theta_hat = state_.theta_grid.center(sel.i_star);
  state_.sigma2_hat = state_.sigma_grid.center_1d(0, sel.j_star);
}

bool GsEstimator::feasible(std::int64_t i, std::int64_t j) const {
  if (state_.costs.empty()) return false;
  const double S = state_.costs[static_cast<std::size_t>(i)];
  if (state_.eta == 0) return std::abs(S) <= state_.threshold;
  return std::abs(S - static_cast<double>(state_.eta) * state_.sigma_grid.center_1d(0, j)) <= state_.threshold;
}

std::vector<EstimateRecord> run_estimator(GsEstimator& est, const Trajectory& traj, std::span<const double> truth,
                                          std::span<const std::int64_t> force_at) {
  std::vector<EstimateRecord> out;
  out.reserve(static_cast<std::size_t>(traj.length()) + 1);
  auto fill_error = [&](EstimateRecord& r) {
    if (!truth.empty()) r.error_norm = distance(r.theta_hat, truth);
  };
  EstimateRecord first;
  first.t = est.state().t;
  first.theta_hat = est.state().theta_hat;
  first.sigma2_hat = est.state().sigma2_hat;
  fill_error(first);
  out.push_back(first);
  while (est.state().t < traj.length()) {
    const std::int64_t next = est.state().t + 1;
    const bool force = std::binary_search(force_at.begin(), force_at.end(), next);
    EstimateRecord r = est.advance(traj, force);
    fill_error(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string estimates_to_csv(std::span<const EstimateRecord> records, int n) {
  std::string out = "t";
  for (int j = 1; j <= n; ++j) out += ",theta_hat_" + std::to_string(j);
  out += ",sigma2_hat,error_norm,feasible_count,threshold\n";
  for (const auto& r : records) {
    out += std::to_string(r.t);
    for (double v : r.theta_hat) out += "," + format_double(v);
    out += "," + format_double(r.sigma2_hat) + "," + format_double(r.error_norm) + "," +
           std::to_string(r.feasible_count) + "," + format_double(r.threshold) + "\n";
  }
  return out;
}

}  // namespace gsid
