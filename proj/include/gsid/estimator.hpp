#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gsid/common.hpp"
#include "gsid/system.hpp"

namespace gsid {

/// Prior knowledge of sigma_w^2, fixing the admissible variance set Sigma0_t.
struct SigmaScenario {
  enum class Kind { Known, UnboundedGrowing, BoundedBy };
  Kind kind = Kind::UnboundedGrowing;
  double value = 0.0;  // sigma_w^2 for Known, the bound sigma for BoundedBy

  static SigmaScenario known(double sigma2) { return {Kind::Known, sigma2}; }
  static SigmaScenario unbounded_growing() { return {Kind::UnboundedGrowing, 0.0}; }
  static SigmaScenario bounded_by(double sigma) { return {Kind::BoundedBy, sigma}; }
};

/// Which times run a full grid evaluation; other times carry the estimate.
struct EvaluationSchedule {
  enum class Kind { EveryStep, Geometric };
  Kind kind = Kind::Geometric;
  double ratio = 1.25;
  std::int64_t dense_until = 512;  // every step up to here, then ceil(dense_until * ratio^k)

  static EvaluationSchedule every_step() { return {Kind::EveryStep, 1.25, 512}; }
  static EvaluationSchedule geometric(double ratio, std::int64_t dense_until = 512) {
    return {Kind::Geometric, ratio, dense_until};
  }
  bool is_evaluation_time(std::int64_t t) const;
};

struct EstimatorConfig {
  double lambda = 0.02;
  double gamma = 3.0;
  double C = kInf;
  double kappa = 8.0;
  SigmaScenario scenario;
  EvaluationSchedule schedule;
  double c_phi_safety = 1.25;
  int c_phi_lattice = 64;
  bool parallel = true;

  /// Throws ConfigError unless 0 < lambda < 1/4 - 1/(2 kappa), gamma > 0, and
  /// BoundedBy carries sigma > 0.
  void validate() const;

  double theta_side_exponent() const { return 0.25 - 0.5 / kappa - lambda; }
  double sigma_side_exponent() const { return 0.5 - 1.0 / kappa - lambda; }
  double threshold_exponent() const { return 0.5 + 1.0 / kappa + 2.0 * lambda; }
};

/// Equal partition of a box into cells of side <= side_bound.
/// Flat cell indices run row-major with the last dimension fastest.
struct GridSpec {
  Box box;
  double side_bound = 0.0;
  std::vector<std::int64_t> cells;
  std::vector<double> widths;

  std::int64_t count() const;
  void center(std::int64_t flat, std::span<double> out) const;
  std::vector<double> center(std::int64_t flat) const;
  /// Center of cell k along dimension d.
  double center_1d(std::size_t d, std::int64_t k) const { return box.lower[d] + (static_cast<double>(k) + 0.5) * widths[d]; }
  std::vector<std::vector<double>> centers() const;
  /// Flat index of the cell containing p (boundary points go to the upper cell).
  std::int64_t cell_of(std::span<const double> p) const;
  double max_width() const;
};

GridSpec build_grid(const Box& box, double side_bound);

/// Sigma0_t: {sigma_w^2}, [0, t] or [0, sigma].
Box sigma_domain(std::int64_t t, const SigmaScenario& scenario);

struct IndicatorParams {
  double gamma = 3.0;
  double C = kInf;
  double c_w = kInf;  // noise support radius
};

/// 1{||phi_{i-m}|| <= C}, times 1{||phi_i|| <= gamma} when C_w is infinite.
bool omega_indicator(double norm_lagged, double norm_current, const IndicatorParams& p);
/// Same, read from a trajectory; indices i < m give 0.
bool omega_indicator(const Trajectory& traj, std::int64_t i, const IndicatorParams& p);

struct CPhiOptions {
  int lattice = 64;
  double safety = 1.25;
};

/// n * max ||df/dx||^2 / 4 + 1 over Theta x {||z|| <= gamma}, the max taken on a
/// lattice and scaled by `safety`. Throws ConfigError if it is not finite.
double c_phi(const SystemSpec& spec, double gamma, CPhiOptions opt = {});

/// Per-step data (phi_i, y_{i+1} - u_i, indicator) for i = 1, 2, ...
struct ResidualLog {
  int m = 1;
  std::vector<double> phi;
  std::vector<double> target;
  std::vector<std::uint8_t> active;

  std::size_t size() const { return target.size(); }
  void push(std::span<const double> phi_i, double target_i, bool indicator);
  std::span<const double> regressor(std::size_t k) const { return {phi.data() + k * m, static_cast<std::size_t>(m)}; }

  // Active entries only; the cost kernels iterate these.
  std::vector<double> active_phi;
  std::vector<double> active_target;
};

/// sum_{i=1}^{t-1} (f(x, phi_i) - (y_{i+1} - u_i))^2 I_i - eta_t x'.
double g_hat(const SystemSpec& spec, std::span<const double> x, double x_prime, const ResidualLog& log,
             std::int64_t eta);

struct EstimatorState {
  std::int64_t t = 0;
  std::vector<double> theta_hat;
  double sigma2_hat = 0.0;
  std::int64_t eta = 0;
  ResidualLog residual_log;
  std::int64_t feasible_count = 0;
  bool evaluated = false;  // whether step t ran a grid evaluation

  GridSpec theta_grid;  // grids and costs of the last evaluation
  GridSpec sigma_grid;
  std::vector<double> costs;  // S(o_i) per theta cell
  double threshold = 0.0;
  std::int64_t i_star = -1;
  std::int64_t j_star = -1;
  std::vector<std::uint8_t> indicators;  // I_i for i = 0..t
};

struct EstimateRecord {
  std::int64_t t = 0;
  std::vector<double> theta_hat;
  double sigma2_hat = 0.0;
  double error_norm = std::numeric_limits<double>::quiet_NaN();  // NaN when the truth is unknown
  std::int64_t feasible_count = 0;
  double threshold = 0.0;
  bool evaluated = false;
  double theta_cell_side = 0.0;
  double sigma_cell_side = 0.0;
  std::int64_t i_star = -1;
  std::int64_t j_star = -1;
};

/// Feasible-set summary from one grid evaluation.
struct Selection {
  std::int64_t feasible_count = 0;
  std::int64_t i_star = -1;  // -1 when J_t is empty
  std::int64_t j_star = -1;
};

/// Selects (i*, j*) from per-cell costs using the separable form of G_t:
/// the feasible sigma cells of each theta cell form one contiguous index range.
Selection select_feasible(std::span<const double> costs, const GridSpec& sigma_grid, std::int64_t eta,
                          double threshold);

class GsEstimator {
 public:
  GsEstimator(SystemSpec spec, EstimatorConfig config, double noise_support);

  /// Consumes data through time state().t + 1 and returns that step's record.
  /// Evaluates the grids at scheduled times (t >= 2) or when `force` is set.
  EstimateRecord advance(const Trajectory& traj, bool force = false);

  const EstimatorState& state() const { return state_; }
  const SystemSpec& spec() const { return spec_; }
  const EstimatorConfig& config() const { return config_; }
  double c_phi_value() const { return c_phi_; }
  const IndicatorParams& indicator_params() const { return ind_; }

  /// Whether (i, j) was in J_t at the last evaluation.
  bool feasible(std::int64_t i, std::int64_t j) const;

 private:
  void evaluate(std::int64_t t);

  SystemSpec spec_;
  EstimatorConfig config_;
  IndicatorParams ind_;
  double c_phi_ = 1.0;
  EstimatorState state_;
};

/// Runs the estimator over a full trajectory, one record per t in [0, T].
/// `truth` (may be empty) fills error_norm; `force_at` lists extra evaluation times.
std::vector<EstimateRecord> run_estimator(GsEstimator& est, const Trajectory& traj,
                                          std::span<const double> truth = {},
                                          std::span<const std::int64_t> force_at = {});

/// CSV with columns t,theta_hat_1..n,sigma2_hat,error_norm,feasible_count,threshold.
std::string estimates_to_csv(std::span<const EstimateRecord> records, int n);

}  // namespace gsid
