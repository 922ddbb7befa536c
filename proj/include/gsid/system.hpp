#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gsid/common.hpp"
#include "gsid/expression.hpp"

namespace gsid {

// ---------------------------------------------------------------------------
// Models f(x, z), x in R^n (parameters), z in R^m (regressor).

/// f(x, y) = sin(x y), n = m = 1.
struct SinProduct {};

/// f(x1, x2, y) = x1 y^b1 + x2 y^b2, n = 2, m = 1, b1 != b2.
struct PowerBasis {
  int b1 = 1;
  int b2 = 2;
};

/// Dead-zone counterexample, n = 1, m = 2:
/// f = 0 for |y1| <= C_w, x (y1 - C_w) for y1 > C_w, x (y1 + C_w) for y1 < -C_w.
struct PiecewiseRemark {
  double c_w = 1.0;
};

/// Parsed arithmetic expression with declared dimensions.
struct ExpressionModel {
  std::string source;
  Expression ast;
  int n = 1;
  int m = 1;
};

using ModelKind = std::variant<SinProduct, PowerBasis, PiecewiseRemark, ExpressionModel>;

/// Parses `source`; declared dimensions default to the highest indices used
/// (at least 1) and may be raised but not lowered below them.
ExpressionModel parse_expression(const std::string& source, int n = 0, int m = 0);

enum class GradientMode { Analytic, FiniteDifference };

/// The model together with its dimensions and parameter box Theta.
class SystemSpec {
 public:
  SystemSpec(ModelKind model, Box theta_box, std::optional<GradientMode> mode = std::nullopt);

  int n() const { return n_; }
  int m() const { return m_; }
  const Box& theta_box() const { return theta_box_; }
  const ModelKind& model() const { return model_; }
  GradientMode gradient_mode() const { return mode_; }
  std::string model_name() const;

 private:
  ModelKind model_;
  Box theta_box_;
  GradientMode mode_;
  int n_ = 1;
  int m_ = 1;
};

double evaluate_model(const SystemSpec& spec, std::span<const double> x, std::span<const double> z);

/// Analytic for catalog models; central differences with
/// h_j = 1e-6 max(1, |x_j|) for expressions (or when FiniteDifference is forced).
void evaluate_gradient(const SystemSpec& spec, std::span<const double> x, std::span<const double> z,
                       std::span<double> out);
std::vector<double> evaluate_gradient(const SystemSpec& spec, std::span<const double> x,
                                      std::span<const double> z);

// ---------------------------------------------------------------------------
// Noise.

struct UniformSymmetric {
  double c_w = 1.0;
};
struct Gaussian {
  double sigma = 1.0;
};
struct StudentT {
  double df = 10.0;
  double scale = 1.0;
};
using NoiseFamily = std::variant<UniformSymmetric, Gaussian, StudentT>;

class NoiseSpec {
 public:
  NoiseSpec(NoiseFamily family, double kappa = 8.0);

  const NoiseFamily& family() const { return family_; }
  double kappa() const { return kappa_; }
  /// Support radius C_w; infinite for Gaussian and Student-t.
  double support() const;
  /// sigma_w^2 = E w^2.
  double variance() const;
  /// bar sigma_w^2 = E (w^2 - sigma_w^2)^2.
  double fourth_central_of_square() const;

  /// Draw for time index t under `seed`. Uniform and Student-t use the
  /// inverse CDF of one uniform; Gaussian uses Box-Muller on two.
  double draw(std::uint64_t seed, std::uint64_t t) const;

 private:
  NoiseFamily family_;
  double kappa_;
};

// ---------------------------------------------------------------------------
// Inputs and simulation.

struct InputPolicy {
  enum class Kind { Zero, Constant, SineSweep, Playback };
  Kind kind = Kind::Zero;
  double value = 0.0;      // Constant
  double amplitude = 0.0;  // SineSweep
  double period = 1.0;     // SineSweep
  std::vector<double> samples;  // Playback; zero after the last sample
  double c_u = kInf;       // |u_t| <= c_u

  static InputPolicy zero() { return {}; }
  static InputPolicy constant(double c, double c_u = kInf);
  static InputPolicy sine_sweep(double amplitude, double period, double c_u = kInf);
  static InputPolicy playback(std::vector<double> samples, double c_u = kInf);

  double at(std::int64_t t) const;
};

/// Outputs y_t for t in [1-m, T], with u_t and w_t for t in [0, T] (w_0 = 0).
/// Satisfies y_{t+1} = (f(theta, phi_t) + u_t) + w_{t+1} exactly.
struct Trajectory {
  int m = 1;
  std::vector<double> y_init;  // (y_0, y_{-1}, ..., y_{1-m})
  std::vector<double> y;       // y[t], t = 0..T
  std::vector<double> u;       // u[t], t = 0..T
  std::vector<double> w;       // w[t], t = 0..T
  std::uint64_t seed = 0;
  bool unstable = false;       // blow-up bound hit; arrays truncated at the last finite step

  std::int64_t length() const { return static_cast<std::int64_t>(y.size()) - 1; }
  /// y_t for t >= 1-m.
  double output(std::int64_t t) const;
  /// phi_t = (y_t, ..., y_{t-m+1}).
  void regressor(std::int64_t t, std::span<double> out) const;
  std::vector<double> regressor(std::int64_t t) const;

  /// One JSON object per step: {"t":int,"y":float,"u":float,"w":float}.
  std::string to_jsonl() const;
};

inline constexpr double kBlowUpBound = 1e12;

Trajectory simulate(const SystemSpec& spec, const NoiseSpec& noise, std::span<const double> theta,
                    const InputPolicy& policy, std::span<const double> y_init, std::int64_t T,
                    std::uint64_t seed, double blow_up = kBlowUpBound);

}  // namespace gsid
