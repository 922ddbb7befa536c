#include "gsid/excitation.hpp"

#include <omp.h>

#include <cmath>
#include <numbers>

namespace gsid {

namespace {

std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "\"" + format_double(v) + "\""; }

std::string json_array(std::span<const double> v) {
  std::string s = "[";
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + json_number(v[k]);
  return s + "]";
}

}  // namespace

std::vector<double> g_eval_all(const SystemSpec& spec, int level, std::span<const double> x_block,
                               std::span<const double> y_block) {
  if (level == 1) return evaluate_gradient(spec, x_block, y_block);
  const std::size_t hx = x_block.size() / 2;
  const std::size_t hy = y_block.size() / 2;
  const auto a = g_eval_all(spec, level - 1, x_block.first(hx), y_block.first(hy));
  const auto b = g_eval_all(spec, level - 1, x_block.subspan(hx), y_block.subspan(hy));
  // a[0] = g^{k-1}_{k-1}(z), a[j - k + 1] = g^{k-1}_j(z) for j >= k.
  std::vector<double> out(a.size() - 1);
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = a[0] * b[e + 1] - b[0] * a[e + 1];
  return out;
}

double g_eval(const SystemSpec& spec, int level, int index, const GNode& node) {
  const int n = spec.n();
  if (level < 1 || level > index || index > n) {
    throw ConfigError("g_eval: need 1 <= k <= j <= n, got k = " + std::to_string(level) + ", j = " +
                      std::to_string(index) + ", n = " + std::to_string(n));
  }
  const std::size_t copies = std::size_t{1} << (level - 1);
  if (node.level != level || node.x_block.size() != copies * n || node.y_block.size() != copies * spec.m()) {
    throw ConfigError("g_eval: dimension mismatch for level " + std::to_string(level) + " node");
  }
  return g_eval_all(spec, level, node.x_block, node.y_block)[index - level];
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Member: return "member";
    case Verdict::NonmemberAtSample: return "nonmember-at-sample";
    case Verdict::Undecided: return "undecided";
  }
  return "undecided";
}

std::optional<double> analytic_min_abs_g(const SystemSpec& spec, std::span<const double> beta) {
  if (!std::holds_alternative<SinProduct>(spec.model()) || beta.size() != 1) return std::nullopt;
  const double b = beta[0];
  if (b == 0.0) return 0.0;
  const double u0 = spec.theta_box().lower[0] * b;
  const double u1 = spec.theta_box().upper[0] * b;
  const double lo = std::min(u0, u1);
  const double hi = std::max(u0, u1);
  const double k = std::ceil((lo - std::numbers::pi / 2) / std::numbers::pi);
  if (std::numbers::pi / 2 + k * std::numbers::pi <= hi) return 0.0;
  return std::abs(b) * std::min(std::abs(std::cos(lo)), std::abs(std::cos(hi)));
}

MembershipResult p_prime_membership(const SystemSpec& spec, std::span<const double> beta, int theta_grid_density,
                                    double tol) {
  if (!(tol > 0.0)) throw ConfigError("p_prime_membership: tol must be > 0");
  const int n = spec.n();
  const std::size_t copies = std::size_t{1} << (n - 1);
  if (beta.size() != copies * spec.m()) throw ConfigError("p_prime_membership: beta must have 2^(n-1) m entries");
  const int D = std::max(2, theta_grid_density);
  const std::size_t dims = copies * n;
  const double total = std::pow(static_cast<double>(D), static_cast<double>(dims));
  if (total > 5e7) throw CapExceeded("p_prime_membership: lattice too large", static_cast<std::size_t>(total));

  const Box& theta = spec.theta_box();
  std::vector<int> idx(dims, 0);
  std::vector<double> x(dims);
  MembershipResult r;
  r.min_abs_g = kInf;
  bool pos = false;
  bool neg = false;
  for (;;) {
    for (std::size_t d = 0; d < dims; ++d) {
      const std::size_t c = d % n;
      x[d] = theta.lower[c] + theta.side(c) * static_cast<double>(idx[d]) / (D - 1);
    }
    const double g = g_eval_all(spec, n, x, beta)[0];
    pos = pos || g > 0.0;
    neg = neg || g < 0.0;
    r.min_abs_g = std::min(r.min_abs_g, std::abs(g));
    std::size_t d = dims;
    while (d-- > 0) {
      if (++idx[d] < D) break;
      idx[d] = 0;
    }
    if (d == static_cast<std::size_t>(-1)) break;
  }
  r.sign_change = pos && neg;
  r.analytic_min = analytic_min_abs_g(spec, beta);
  if (r.min_abs_g > tol && !r.sign_change) {
    r.verdict = Verdict::Member;
  } else if (r.sign_change || r.min_abs_g < tol / 10.0) {
    r.verdict = Verdict::NonmemberAtSample;
  } else {
    r.verdict = Verdict::Undecided;
  }
  return r;
}

bool excitation_point_simple(const SystemSpec& spec, std::span<const double> x, std::span<const double> x_prime,
                             std::span<const double> beta, double tol) {
  if (std::equal(x.begin(), x.end(), x_prime.begin(), x_prime.end())) {
    throw ConfigError("excitation_point_simple: x and x' must differ");
  }
  return std::abs(evaluate_model(spec, x, beta) - evaluate_model(spec, x_prime, beta)) > tol;
}

std::vector<Interval> excitation_set_1d(const SystemSpec& spec, std::span<const double> x,
                                        std::span<const double> x_prime, std::span<const double> beta_base,
                                        int coord, const Interval& Z, int samples, double tol) {
  if (samples < 2) throw ConfigError("excitation_set_1d: need at least 2 samples");
  std::vector<double> beta(beta_base.begin(), beta_base.end());
  auto member = [&](double s) {
    beta[coord] = s;
    return excitation_point_simple(spec, x, x_prime, beta, tol);
  };
  auto boundary = [&](double a, double b) {
    // member(a) != member(b); shrink to adjacent doubles.
    const bool ma = member(a);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid == a || mid == b) break;
      (member(mid) == ma ? a : b) = mid;
    }
    return std::pair{a, b};
  };

  std::vector<Interval> out;
  double prev = Z.lo;
  bool prev_in = member(prev);
  double start = Z.lo;
  for (int k = 1; k < samples; ++k) {
    const double s = Z.lo + (Z.hi - Z.lo) * static_cast<double>(k) / (samples - 1);
    const bool in = member(s);
    if (in != prev_in) {
      const auto [a, b] = boundary(prev, s);
      if (in) {
        start = b;
      } else {
        out.push_back({start, a});
      }
    }
    prev = s;
    prev_in = in;
  }
  if (prev_in) out.push_back({start, Z.hi});
  return out;
}

ExcitationReport excitation_scan(const SystemSpec& spec, const Box& search_box, int samples_per_dim,
                                 int theta_grid_density, double tol) {
  const std::size_t l = (std::size_t{1} << (spec.n() - 1)) * spec.m();
  if (search_box.dims() != l) throw ConfigError("excitation_scan: search box must have dimension 2^(n-1) m");
  const int S = std::max(1, samples_per_dim);
  const double total = std::pow(static_cast<double>(S), static_cast<double>(l));
  if (total > 1e6) throw CapExceeded("excitation_scan: too many beta samples", static_cast<std::size_t>(total));
  const auto count = static_cast<std::int64_t>(total);

  ExcitationReport rep;
  rep.search_box = search_box;
  rep.records.resize(static_cast<std::size_t>(count));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < count; ++k) {
    try {
      std::vector<double> beta(l);
      std::int64_t rem = k;
      for (std::size_t d = l; d-- > 0;) {
        const auto i = rem % S;
        rem /= S;
        beta[d] = S == 1 ? 0.5 * (search_box.lower[d] + search_box.upper[d])
                         : search_box.lower[d] + search_box.side(d) * static_cast<double>(i) / (S - 1);
      }
      const auto res = p_prime_membership(spec, beta, theta_grid_density, tol);
      rep.records[static_cast<std::size_t>(k)] = {beta, res.min_abs_g, res.verdict};
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (const auto& r : rep.records) {
    if (r.verdict == Verdict::Member) rep.members.push_back(r.beta);
  }
  rep.density_estimate = rep.members.empty() ? 0.0 : lower_density(DensityQuery{search_box, rep.members}).density;
  return rep;
}

std::string ExcitationReport::to_json() const {
  std::string s = "{\"records\":[";
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    s += std::string(k ? "," : "") + "\n{\"beta\":" + json_array(r.beta) + ",\"min_abs_g\":" +
         json_number(r.min_abs_g) + ",\"verdict\":\"" + to_string(r.verdict) + "\"}";
  }
  s += "\n],\"density\":{\"search_box\":{\"lower\":" + json_array(search_box.lower) +
       ",\"upper\":" + json_array(search_box.upper) + "},\"sample_count\":" + std::to_string(records.size()) +
       ",\"member_count\":" + std::to_string(members.size()) + ",\"lower_density\":" +
       json_number(density_estimate) + "}}\n";
  return s;
}

}  // namespace gsid
