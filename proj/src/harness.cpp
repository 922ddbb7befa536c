#include "gsid/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>

#include "gsid/rng.hpp"

namespace gsid {

void EnsembleConfig::validate() const {
  if (num_runs < 1) throw ConfigError("ensemble: num_runs must be >= 1");
  if (T_max < 2) throw ConfigError("ensemble: T_max must be >= 2");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) throw ConfigError("ensemble: checkpoints must be sorted");
  for (auto c : checkpoints) {
    if (c < 2 || c > T_max) throw ConfigError("ensemble: checkpoint " + std::to_string(c) + " outside [2, T_max]");
  }
  if (!true_theta.empty() && true_theta.size() != static_cast<std::size_t>(spec.n())) {
    throw ConfigError("ensemble: true_theta must have n entries");
  }
  if (!y_init.empty() && y_init.size() != static_cast<std::size_t>(spec.m())) {
    throw ConfigError("ensemble: y_init must have m entries");
  }
  estimator.validate();
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

RunResult run_one(const EnsembleConfig& cfg, int index, bool parallel_estimator) {
  RunResult r;
  r.index = index;
  r.seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(index));
  const std::vector<double> y0 = cfg.y_init.empty() ? std::vector<double>(cfg.spec.m(), 0.0) : cfg.y_init;
  const auto traj = simulate(cfg.spec, cfg.noise, cfg.true_theta, cfg.policy, y0, cfg.T_max, r.seed);
  double acc = 0.0;
  for (std::int64_t t = 1; t <= traj.length(); ++t) {
    acc += traj.y[t] * traj.y[t];
    r.max_mean_square = std::max(r.max_mean_square, acc / static_cast<double>(t));
  }
  r.unstable = traj.unstable || !(r.max_mean_square <= cfg.stability_bound);
  if (r.unstable) return r;

  EstimatorConfig ec = cfg.estimator;
  ec.parallel = parallel_estimator;
  GsEstimator est(cfg.spec, ec, cfg.noise.support());
  auto records = run_estimator(est, traj, cfg.true_theta, cfg.checkpoints);
  if (cfg.keep_all_records) {
    r.records = std::move(records);
  } else {
    for (auto c : cfg.checkpoints) r.records.push_back(records[static_cast<std::size_t>(c)]);
  }
  return r;
}

const EstimateRecord* record_at(const RunResult& r, std::int64_t t) {
  const auto it = std::lower_bound(r.records.begin(), r.records.end(), t,
                                   [](const EstimateRecord& rec, std::int64_t v) { return rec.t < v; });
  return it != r.records.end() && it->t == t ? &*it : nullptr;
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleConfig& cfg) {
  cfg.validate();
  EnsembleResult res;
  res.runs.resize(static_cast<std::size_t>(cfg.num_runs));
  const int threads = cfg.jobs > 0 ? cfg.jobs : omp_get_max_threads();
  const bool inner_parallel = threads == 1;
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int k = 0; k < cfg.num_runs; ++k) {
    try {
      res.runs[k] = run_one(cfg, k, inner_parallel);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (const auto& r : res.runs) res.unstable_count += r.unstable ? 1 : 0;
  if (5 * res.unstable_count > cfg.num_runs) {
    throw EnsembleError("ensemble: " + std::to_string(res.unstable_count) + " of " + std::to_string(cfg.num_runs) +
                        " runs failed the stability screen");
  }
  for (auto c : cfg.checkpoints) {
    std::vector<double> err;
    std::vector<double> s2;
    for (const auto& r : res.runs) {
      if (r.unstable) continue;
      if (const auto* rec = record_at(r, c)) {
        err.push_back(rec->error_norm);
        s2.push_back(rec->sigma2_hat);
      }
    }
    res.summary.push_back({c, quantile(err, 0.1), quantile(err, 0.5), quantile(err, 0.9), quantile(s2, 0.5),
                           res.unstable_count});
  }
  return res;
}

std::string EnsembleResult::summary_csv() const {
  std::string s = "t,q10,q50,q90,sigma2_q50,unstable_count\n";
  for (const auto& c : summary) {
    s += std::to_string(c.t) + "," + format_double(c.q10) + "," + format_double(c.q50) + "," + format_double(c.q90) +
         "," + format_double(c.sigma2_q50) + "," + std::to_string(c.unstable_count) + "\n";
  }
  return s;
}

std::string EnsembleResult::runs_jsonl() const {
  std::string s;
  for (const auto& r : runs) {
    if (r.unstable) {
      s += "{\"run\":" + std::to_string(r.index) + ",\"seed\":" + std::to_string(r.seed) + ",\"unstable\":true}\n";
      continue;
    }
    for (const auto& rec : r.records) {
      s += "{\"run\":" + std::to_string(r.index) + ",\"seed\":" + std::to_string(r.seed) + ",\"t\":" +
           std::to_string(rec.t) + ",\"theta_hat\":[";
      for (std::size_t j = 0; j < rec.theta_hat.size(); ++j) s += (j ? "," : "") + format_double(rec.theta_hat[j]);
      s += "],\"sigma2_hat\":" + format_double(rec.sigma2_hat) + ",\"error_norm\":" +
           (std::isfinite(rec.error_norm) ? format_double(rec.error_norm) : std::string("null")) + "}\n";
    }
  }
  return s;
}

RateFit fit_rate(std::span<const std::int64_t> t, std::span<const double> medians, double kappa, double lambda,
                 std::int64_t min_t) {
  if (t.size() != medians.size()) throw ConfigError("fit_rate: t and medians differ in length");
  RateFit fit;
  fit.theoretical_exponent = -(0.25 - 0.5 / kappa - lambda);
  std::vector<double> xs;
  std::vector<double> ys;
  bool zero = false;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < min_t) continue;
    if (medians[k] == 0.0) zero = true;
    xs.push_back(std::log(static_cast<double>(t[k])));
    ys.push_back(std::log(medians[k]));
  }
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 4) throw ConfigError("fit_rate: need at least 4 checkpoints >= " + std::to_string(min_t));
  if (zero) {
    fit.slope = -kInf;
    fit.intercept = 0.0;
    fit.r_squared = 1.0;
    return fit;
  }
  const double N = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k] / N;
    my += ys[k] / N;
  }
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double e = ys[k] - (fit.intercept + fit.slope * xs[k]);
    ssr += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  return fit;
}

std::vector<VarianceRow> variance_diagnostic(const Trajectory& traj, double sigma2, double bar_sigma2,
                                             const IndicatorParams& params, std::span<const std::int64_t> eta_targets,
                                             double flag_above) {
  std::vector<std::int64_t> targets;
  for (auto e : eta_targets) {
    if (e >= 16) targets.push_back(e);
  }
  std::sort(targets.begin(), targets.end());
  std::vector<VarianceRow> rows;
  const double bar_sigma = std::sqrt(bar_sigma2);
  std::size_t next = 0;
  std::int64_t eta = 0;
  double sum = 0.0;
  for (std::int64_t i = 1; i < traj.length() && next < targets.size(); ++i) {
    if (!omega_indicator(traj, i, params)) continue;
    ++eta;
    sum += traj.w[i + 1] * traj.w[i + 1] - sigma2;
    while (next < targets.size() && eta == targets[next]) {
      const double e = static_cast<double>(eta);
      const double den = bar_sigma * std::sqrt(2.0 * e * std::log(std::log(e)));
      const double num = std::abs(sum);
      VarianceRow row{i + 1, eta, sum, num == 0.0 ? 0.0 : (den > 0.0 ? num / den : kInf), false};
      row.flagged = row.ratio > flag_above;
      rows.push_back(row);
      ++next;
    }
  }
  return rows;
}

std::string CounterexampleReport::to_json() const {
  auto vec = [](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_double(v[k]);
    return s + "]";
  };
  return "{\"c_w\":" + format_double(c_w) + ",\"T\":" + std::to_string(T) + ",\"seed\":" + std::to_string(seed) +
         ",\"trajectories_identical\":" + (trajectories_identical ? "true" : "false") +
         ",\"feasible_sets_equal\":" + (feasible_sets_equal ? "true" : "false") + ",\"theta_hat_1\":" +
         vec(theta_hat_1) + ",\"theta_hat_2\":" + vec(theta_hat_2) + ",\"dist_to_1\":" + format_double(dist_to_1) +
         ",\"dist_to_2\":" + format_double(dist_to_2) + ",\"non_identifiable\":" +
         (non_identifiable ? "true" : "false") + "}\n";
}

CounterexampleReport counterexample_demo(double c_w, std::int64_t T, std::uint64_t seed, EstimatorConfig est) {
  const SystemSpec spec(PiecewiseRemark{c_w}, Box::interval(1.0, 2.0));
  const NoiseSpec noise(UniformSymmetric{c_w}, est.kappa);
  const std::vector<double> y0{0.0, 0.0};
  const std::vector<double> th1{1.0};
  const std::vector<double> th2{2.0};
  const auto a = simulate(spec, noise, th1, InputPolicy::zero(), y0, T, seed);
  const auto b = simulate(spec, noise, th2, InputPolicy::zero(), y0, T, seed);

  CounterexampleReport rep;
  rep.c_w = c_w;
  rep.T = T;
  rep.seed = seed;
  rep.trajectories_identical = a.to_jsonl() == b.to_jsonl();

  GsEstimator ea(spec, est, noise.support());
  GsEstimator eb(spec, est, noise.support());
  bool equal = true;
  while (ea.state().t < a.length()) {
    const auto ra = ea.advance(a);
    const auto rb = eb.advance(b);
    const auto& sa = ea.state();
    const auto& sb = eb.state();
    if (sa.evaluated != sb.evaluated) {
      equal = false;
      continue;
    }
    if (sa.evaluated) {
      equal = equal && sa.costs == sb.costs && sa.threshold == sb.threshold && sa.eta == sb.eta &&
              sa.feasible_count == sb.feasible_count && sa.i_star == sb.i_star && sa.j_star == sb.j_star;
    }
    equal = equal && ra.theta_hat == rb.theta_hat && ra.sigma2_hat == rb.sigma2_hat;
  }
  rep.feasible_sets_equal = equal;
  rep.theta_hat_1 = ea.state().theta_hat;
  rep.theta_hat_2 = eb.state().theta_hat;
  rep.dist_to_1 = distance(rep.theta_hat_1, th1);
  rep.dist_to_2 = distance(rep.theta_hat_2, th2);
  rep.non_identifiable =
      rep.trajectories_identical && rep.feasible_sets_equal && std::max(rep.dist_to_1, rep.dist_to_2) >= 0.5;
  return rep;
}

}  // namespace gsid
