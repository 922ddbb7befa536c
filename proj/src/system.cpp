#include "gsid/system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "gsid/rng.hpp"

namespace gsid {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double int_pow(double y, int b) {
  if (y == 0.0 && b < 0) throw DomainError("power basis domain error: 0^" + std::to_string(b));
  return std::pow(y, b);
}

std::pair<int, int> model_dims(const ModelKind& model) {
  return std::visit(overloaded{
                        [](const SinProduct&) { return std::pair{1, 1}; },
                        [](const PowerBasis&) { return std::pair{2, 1}; },
                        [](const PiecewiseRemark&) { return std::pair{1, 2}; },
                        [](const ExpressionModel& e) { return std::pair{e.n, e.m}; },
                    },
                    model);
}

void finite_difference(const SystemSpec& spec, std::span<const double> x, std::span<const double> z,
                       std::span<double> out) {
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    double hi = 0.0;
    double lo = 0.0;
    try {
      probe[j] = x[j] + h;
      hi = evaluate_model(spec, probe, z);
      probe[j] = x[j] - h;
      lo = evaluate_model(spec, probe, z);
    } catch (const DomainError& e) {
      throw DomainError("finite-difference stencil failed in coordinate x_" + std::to_string(j + 1) + ": " +
                        e.what());
    }
    probe[j] = x[j];
    if (!std::isfinite(hi) || !std::isfinite(lo)) {
      throw DomainError("non-finite stencil value in coordinate x_" + std::to_string(j + 1));
    }
    out[j] = (hi - lo) / (2.0 * h);
  }
}

}  // namespace

ExpressionModel parse_expression(const std::string& source, int n, int m) {
  ExpressionModel e;
  e.source = source;
  e.ast = Expression::parse(source);
  const int nx = std::max(1, e.ast.max_x_index());
  const int ny = std::max(1, e.ast.max_y_index());
  if (n != 0 && n < e.ast.max_x_index()) {
    throw ConfigError("expression uses x_" + std::to_string(e.ast.max_x_index()) + " but n = " + std::to_string(n));
  }
  if (m != 0 && m < e.ast.max_y_index()) {
    throw ConfigError("expression uses y_" + std::to_string(e.ast.max_y_index()) + " but m = " + std::to_string(m));
  }
  e.n = n != 0 ? n : nx;
  e.m = m != 0 ? m : ny;
  return e;
}

SystemSpec::SystemSpec(ModelKind model, Box theta_box, std::optional<GradientMode> mode)
    : model_(std::move(model)), theta_box_(std::move(theta_box)) {
  std::tie(n_, m_) = model_dims(model_);
  if (n_ < 1 || m_ < 1) throw ConfigError("model dimensions must be positive");
  if (static_cast<int>(theta_box_.dims()) != n_) {
    throw ConfigError("theta box has dimension " + std::to_string(theta_box_.dims()) + ", model needs n = " +
                      std::to_string(n_));
  }
  if (!theta_box_.nondegenerate()) throw ConfigError("theta box must have every side length > 0");
  if (const auto* pb = std::get_if<PowerBasis>(&model_); pb && pb->b1 == pb->b2) {
    throw ConfigError("power basis requires b1 != b2");
  }
  if (const auto* pr = std::get_if<PiecewiseRemark>(&model_); pr && !(pr->c_w > 0.0 && std::isfinite(pr->c_w))) {
    throw ConfigError("piecewise remark model requires finite C_w > 0");
  }
  const bool is_expr = std::holds_alternative<ExpressionModel>(model_);
  mode_ = mode.value_or(is_expr ? GradientMode::FiniteDifference : GradientMode::Analytic);
  if (is_expr && mode_ == GradientMode::Analytic) {
    throw ConfigError("expression models only support finite-difference gradients");
  }
}

std::string SystemSpec::model_name() const {
  return std::visit(overloaded{
                        [](const SinProduct&) { return std::string("sin_product"); },
                        [](const PowerBasis& p) {
                          return "power_basis(" + std::to_string(p.b1) + "," + std::to_string(p.b2) + ")";
                        },
                        [](const PiecewiseRemark& p) { return "piecewise_remark(" + format_double(p.c_w) + ")"; },
                        [](const ExpressionModel& e) { return "expression(" + e.source + ")"; },
                    },
                    model_);
}

double evaluate_model(const SystemSpec& spec, std::span<const double> x, std::span<const double> z) {
  return std::visit(overloaded{
                        [&](const SinProduct&) { return std::sin(x[0] * z[0]); },
                        [&](const PowerBasis& p) { return x[0] * int_pow(z[0], p.b1) + x[1] * int_pow(z[0], p.b2); },
                        [&](const PiecewiseRemark& p) {
                          const double y1 = z[0];
                          if (y1 > p.c_w) return x[0] * (y1 - p.c_w);
                          if (y1 < -p.c_w) return x[0] * (y1 + p.c_w);
                          return 0.0;
                        },
                        [&](const ExpressionModel& e) { return e.ast.evaluate(x, z); },
                    },
                    spec.model());
}

void evaluate_gradient(const SystemSpec& spec, std::span<const double> x, std::span<const double> z,
                       std::span<double> out) {
  if (spec.gradient_mode() == GradientMode::FiniteDifference) {
    finite_difference(spec, x, z, out);
    return;
  }
  std::visit(overloaded{
                 [&](const SinProduct&) { out[0] = z[0] * std::cos(x[0] * z[0]); },
                 [&](const PowerBasis& p) {
                   out[0] = int_pow(z[0], p.b1);
                   out[1] = int_pow(z[0], p.b2);
                 },
                 [&](const PiecewiseRemark& p) {
                   const double y1 = z[0];
                   out[0] = y1 > p.c_w ? y1 - p.c_w : (y1 < -p.c_w ? y1 + p.c_w : 0.0);
                 },
                 [&](const ExpressionModel&) { finite_difference(spec, x, z, out); },
             },
             spec.model());
}

std::vector<double> evaluate_gradient(const SystemSpec& spec, std::span<const double> x,
                                      std::span<const double> z) {
  std::vector<double> g(spec.n());
  evaluate_gradient(spec, x, z, g);
  return g;
}

// ---------------------------------------------------------------------------

NoiseSpec::NoiseSpec(NoiseFamily family, double kappa) : family_(family), kappa_(kappa) {
  if (!(kappa_ > 0.0)) throw ConfigError("noise: kappa must be positive");
  std::visit(overloaded{
                 [](const UniformSymmetric& u) {
                   if (!(u.c_w >= 0.0 && std::isfinite(u.c_w))) throw ConfigError("uniform noise needs finite C_w >= 0");
                 },
                 [](const Gaussian& g) {
                   if (!(g.sigma >= 0.0 && std::isfinite(g.sigma))) throw ConfigError("gaussian noise needs sigma >= 0");
                 },
                 [this](const StudentT& s) {
                   if (!(s.scale > 0.0)) throw ConfigError("student-t noise needs scale > 0");
                   if (!(s.df > kappa_)) throw ConfigError("student-t noise needs df > kappa");
                 },
             },
             family_);
}

double NoiseSpec::support() const {
  if (const auto* u = std::get_if<UniformSymmetric>(&family_)) return u->c_w;
  return kInf;
}

double NoiseSpec::variance() const {
  return std::visit(overloaded{
                        [](const UniformSymmetric& u) { return u.c_w * u.c_w / 3.0; },
                        [](const Gaussian& g) { return g.sigma * g.sigma; },
                        [](const StudentT& s) { return s.scale * s.scale * s.df / (s.df - 2.0); },
                    },
                    family_);
}

double NoiseSpec::fourth_central_of_square() const {
  const double s2 = variance();
  return std::visit(overloaded{
                        [&](const UniformSymmetric& u) { return std::pow(u.c_w, 4) / 5.0 - s2 * s2; },
                        [&](const Gaussian&) { return 2.0 * s2 * s2; },
                        [&](const StudentT& s) {
                          const double m4 = std::pow(s.scale, 4) * 3.0 * s.df * s.df / ((s.df - 2.0) * (s.df - 4.0));
                          return m4 - s2 * s2;
                        },
                    },
                    family_);
}

double NoiseSpec::draw(std::uint64_t seed, std::uint64_t t) const {
  const CounterRng rng(seed);
  return std::visit(overloaded{
                        [&](const UniformSymmetric& u) { return u.c_w * (2.0 * rng.uniform(2 * t) - 1.0); },
                        [&](const Gaussian& g) {
                          const double r = std::sqrt(-2.0 * std::log(rng.uniform(2 * t)));
                          return g.sigma * r * std::cos(2.0 * std::numbers::pi * rng.uniform(2 * t + 1));
                        },
                        [&](const StudentT& s) {
                          const boost::math::students_t dist(s.df);
                          return s.scale * boost::math::quantile(dist, rng.uniform(2 * t));
                        },
                    },
                    family_);
}

// ---------------------------------------------------------------------------

InputPolicy InputPolicy::constant(double c, double c_u) {
  InputPolicy p;
  p.kind = Kind::Constant;
  p.value = c;
  p.c_u = c_u;
  return p;
}

InputPolicy InputPolicy::sine_sweep(double amplitude, double period, double c_u) {
  if (!(period > 0.0)) throw ConfigError("sine sweep period must be > 0");
  InputPolicy p;
  p.kind = Kind::SineSweep;
  p.amplitude = amplitude;
  p.period = period;
  p.c_u = c_u;
  return p;
}

InputPolicy InputPolicy::playback(std::vector<double> samples, double c_u) {
  InputPolicy p;
  p.kind = Kind::Playback;
  p.samples = std::move(samples);
  p.c_u = c_u;
  return p;
}

double InputPolicy::at(std::int64_t t) const {
  double u = 0.0;
  switch (kind) {
    case Kind::Zero:
      break;
    case Kind::Constant:
      u = value;
      break;
    case Kind::SineSweep:
      u = amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period);
      break;
    case Kind::Playback:
      if (t >= 0 && static_cast<std::size_t>(t) < samples.size()) u = samples[t];
      break;
  }
  return std::clamp(u, -c_u, c_u);
}

// ---------------------------------------------------------------------------

double Trajectory::output(std::int64_t t) const {
  if (t >= 0) return y[t];
  return y_init[-t];
}

void Trajectory::regressor(std::int64_t t, std::span<double> out) const {
  for (int k = 0; k < m; ++k) out[k] = output(t - k);
}

std::vector<double> Trajectory::regressor(std::int64_t t) const {
  std::vector<double> phi(m);
  regressor(t, phi);
  return phi;
}

std::string Trajectory::to_jsonl() const {
  std::string out;
  out.reserve(y.size() * 80);
  for (std::size_t t = 0; t < y.size(); ++t) {
    out += "{\"t\":" + std::to_string(t) + ",\"y\":" + format_double(y[t]) + ",\"u\":" + format_double(u[t]) +
           ",\"w\":" + format_double(w[t]) + "}\n";
  }
  return out;
}

Trajectory simulate(const SystemSpec& spec, const NoiseSpec& noise, std::span<const double> theta,
                    const InputPolicy& policy, std::span<const double> y_init, std::int64_t T,
                    std::uint64_t seed, double blow_up) {
  if (T < 1) throw ConfigError("simulate: T must be >= 1");
  if (static_cast<int>(theta.size()) != spec.n()) throw ConfigError("simulate: theta has wrong dimension");
  if (!spec.theta_box().contains(theta)) throw ConfigError("simulate: theta outside the parameter box");
  const int m = spec.m();
  Trajectory tr;
  tr.m = m;
  tr.seed = seed;
  tr.y_init.assign(m, 0.0);
  if (!y_init.empty()) {
    if (static_cast<int>(y_init.size()) != m) throw ConfigError("simulate: y_init must have m entries");
    std::copy(y_init.begin(), y_init.end(), tr.y_init.begin());
  }
  tr.y.reserve(T + 1);
  tr.u.reserve(T + 1);
  tr.w.reserve(T + 1);
  tr.y.push_back(tr.y_init[0]);
  tr.w.push_back(0.0);
  std::vector<double> phi(m);
  for (std::int64_t t = 0; t < T; ++t) {
    const double u = policy.at(t);
    tr.u.push_back(u);
    tr.regressor(t, phi);
    const double w = noise.draw(seed, static_cast<std::uint64_t>(t + 1));
    const double next = (evaluate_model(spec, theta, phi) + u) + w;
    if (!std::isfinite(next) || std::abs(next) > blow_up) {
      tr.unstable = true;
      return tr;
    }
    tr.y.push_back(next);
    tr.w.push_back(w);
  }
  tr.u.push_back(policy.at(T));
  return tr;
}

}  // namespace gsid
