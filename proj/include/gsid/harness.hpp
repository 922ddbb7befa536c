#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsid/estimator.hpp"
#include "gsid/system.hpp"

namespace gsid {

/// Raised when too many ensemble runs fail the stability screen.
class EnsembleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnsembleConfig {
  std::uint64_t base_seed = 1;
  int num_runs = 20;
  std::int64_t T_max = 8192;
  std::vector<std::int64_t> checkpoints;  // sorted, within [2, T_max]
  SystemSpec spec{SinProduct{}, Box::interval(0.0, 2.0 * std::numbers::pi)};
  NoiseSpec noise{Gaussian{0.5}};
  EstimatorConfig estimator;
  InputPolicy policy;
  std::vector<double> y_init;  // empty means zeros
  std::vector<double> true_theta{1.3};
  bool keep_all_records = false;  // otherwise only checkpoint records are kept
  int jobs = 0;                   // 0: OpenMP default
  double stability_bound = 1e3;   // max_t sum_{i<=t} y_i^2 / t

  /// Throws ConfigError on an invalid configuration.
  void validate() const;
};

struct RunResult {
  int index = 0;
  std::uint64_t seed = 0;
  bool unstable = false;
  double max_mean_square = 0.0;
  std::vector<EstimateRecord> records;
};

struct CheckpointSummary {
  std::int64_t t = 0;
  double q10 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double sigma2_q50 = 0.0;
  int unstable_count = 0;
};

struct EnsembleResult {
  std::vector<CheckpointSummary> summary;
  std::vector<RunResult> runs;
  int unstable_count = 0;

  /// Header t,q10,q50,q90,sigma2_q50,unstable_count.
  std::string summary_csv() const;
  /// One line per (run, record): {"run":..,"seed":..,"t":..,"theta_hat":[..],"sigma2_hat":..,"error_norm":..}.
  std::string runs_jsonl() const;
};

/// Quantile with linear interpolation between order statistics (q in [0, 1]).
double quantile(std::vector<double> values, double q);

/// Runs seeded derive_seed(base_seed, run_index), in parallel over runs.
/// Unstable runs are excluded from the quantiles; more than 20% unstable
/// raises EnsembleError.
EnsembleResult run_ensemble(const EnsembleConfig& cfg);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double theoretical_exponent = 0.0;
  int points = 0;
};

/// Least squares of log median error on log t over checkpoints >= min_t.
/// A zero median gives slope -inf. Throws ConfigError with fewer than 4 points.
RateFit fit_rate(std::span<const std::int64_t> t, std::span<const double> medians, double kappa = 8.0,
                 double lambda = 0.02, std::int64_t min_t = 256);

struct VarianceRow {
  std::int64_t t = 0;
  std::int64_t eta = 0;
  double sum = 0.0;    // sum I_i (w_{i+1}^2 - sigma_w^2)
  double ratio = 0.0;  // |sum| / (bar sigma_w sqrt(2 eta log log eta))
  bool flagged = false;
};

/// Ratios at the first t where eta_t reaches each target (targets below 16 are skipped).
std::vector<VarianceRow> variance_diagnostic(const Trajectory& traj, double sigma2, double bar_sigma2,
                                             const IndicatorParams& params, std::span<const std::int64_t> eta_targets,
                                             double flag_above = 1.5);

struct CounterexampleReport {
  double c_w = 0.0;
  std::int64_t T = 0;
  std::uint64_t seed = 0;
  bool trajectories_identical = false;
  bool feasible_sets_equal = false;
  std::vector<double> theta_hat_1;  // estimate at T from the theta = 1 data
  std::vector<double> theta_hat_2;
  double dist_to_1 = 0.0;
  double dist_to_2 = 0.0;
  bool non_identifiable = false;  // identical data and max distance >= 0.5

  std::string to_json() const;
};

/// PiecewiseRemark(C_w) on Theta = [1, 2], y_init = (0, 0), u = 0,
/// UniformSymmetric(C_w) noise: theta = 1 and theta = 2 with one seed.
CounterexampleReport counterexample_demo(double c_w, std::int64_t T = 4096, std::uint64_t seed = 1,
                                         EstimatorConfig est = {});

}  // namespace gsid
