#include "gsid/spectral.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "gsid/rng.hpp"

namespace gsid {

VectorFamily::VectorFamily(int t_, int n_, std::vector<double> rows) : t(t_), n(n_), a(std::move(rows)) {
  if (t < 0 || n < 1 || a.size() != static_cast<std::size_t>(t) * n) {
    throw ConfigError("VectorFamily: need n >= 1 and t * n entries");
  }
}

double VectorFamily::column_sum_sq(int j) const {
  double s = 0.0;
  for (int i = 0; i < t; ++i) s += at(i, j) * at(i, j);
  return s;
}

std::vector<double> VectorFamily::gram() const {
  std::vector<double> S(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < t; ++i) {
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) S[p * n + q] += at(i, p) * at(i, q);
    }
  }
  return S;
}

std::size_t hierarchy_size(int t, int k) {
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  std::size_t s = static_cast<std::size_t>(std::max(t, 0));
  for (int j = 2; j <= k; ++j) {
    if (s > 0 && s - 1 > 2 * (kMax / s)) return kMax;
    s = s < 2 ? 0 : s * (s - 1) / 2;
  }
  return s;
}

IndexHierarchy build_hierarchy(int t, int K, std::size_t cap) {
  for (int k = 1; k <= K; ++k) {
    const std::size_t s = hierarchy_size(t, k);
    if (s > cap) {
      throw CapExceeded("index hierarchy H^" + std::to_string(t) + "_" + std::to_string(k) + " has " +
                            std::to_string(s) + " elements, cap is " + std::to_string(cap),
                        s);
    }
  }
  IndexHierarchy h;
  h.t = t;
  for (int k = 2; k <= K; ++k) {
    const std::size_t prev = h.size(k - 1);
    std::vector<std::pair<std::int32_t, std::int32_t>> lvl;
    lvl.reserve(hierarchy_size(t, k));
    for (std::size_t p = 0; p < prev; ++p) {
      for (std::size_t q = p + 1; q < prev; ++q) lvl.emplace_back(static_cast<std::int32_t>(p), static_cast<std::int32_t>(q));
    }
    h.levels.push_back(std::move(lvl));
  }
  return h;
}

double MuNuTable::mu_sq_sum(int k) const {
  double s = 0.0;
  for (std::size_t h = 0; h < size(k); ++h) s += mu(k, h) * mu(k, h);
  return s;
}

MuNuTable build_mu_nu(const VectorFamily& fam, int K, std::size_t cap) {
  if (K < 1 || K > fam.n) throw ConfigError("build_mu_nu: need 1 <= K <= n");
  MuNuTable tab;
  tab.n = fam.n;
  tab.levels = K;
  tab.hierarchy = build_hierarchy(fam.t, K, cap);
  tab.vals.push_back(fam.a);
  for (int k = 1; k < K; ++k) {
    const auto& prev = tab.vals[k - 1];
    const std::size_t wp = static_cast<std::size_t>(fam.n - k + 1);
    const std::size_t w = wp - 1;
    const auto& pairs = tab.hierarchy.levels[k - 1];
    std::vector<double> next(pairs.size() * w);
    for (std::size_t h = 0; h < pairs.size(); ++h) {
      const double* vp = prev.data() + pairs[h].first * wp;
      const double* vq = prev.data() + pairs[h].second * wp;
      for (std::size_t e = 0; e < w; ++e) next[h * w + e] = vp[0] * vq[e + 1] - vq[0] * vp[e + 1];
    }
    tab.vals.push_back(std::move(next));
  }
  return tab;
}

namespace {

double decomposition_denominator(const MuNuTable& table, int k) {
  double den = 1.0;
  for (int j = 1; j + 1 < k; ++j) {
    const double s = table.mu_sq_sum(j);
    if (s == 0.0) throw DomainError("decomposition denominator vanishes: sum of mu^2 at level " + std::to_string(j) + " is 0");
    den *= std::pow(s, k - j - 1);
  }
  return den;
}

}  // namespace

double minor_via_decomposition(const MuNuTable& table, int k) {
  if (k < 1 || k > table.levels) throw ConfigError("minor_via_decomposition: level " + std::to_string(k) + " not in table");
  return table.mu_sq_sum(k) / decomposition_denominator(table, k);
}

double cofactor_via_decomposition(const MuNuTable& table, int k) {
  if (k < 1 || k > table.levels || k + 1 > table.n) {
    throw ConfigError("cofactor_via_decomposition: need 1 <= k <= levels and k < n");
  }
  double s = 0.0;
  for (std::size_t h = 0; h < table.size(k); ++h) s += table.nu(k, h, k + 1) * table.nu(k, h, k + 1);
  return s / decomposition_denominator(table, k);
}

double epsilon_condition(const MuNuTable& table) {
  if (table.n == 1) return 1.0;
  if (table.levels < table.n - 1) throw ConfigError("epsilon_condition: table must reach level n - 1");
  double eps = kInf;
  for (int k = 1; k <= table.n - 1; ++k) {
    const std::size_t H = table.size(k);
    for (int s = k + 1; s <= table.n; ++s) {
      double lhs = 0.0;
      double mu2 = 0.0;
      double nu2 = 0.0;
      for (std::size_t p = 0; p < H; ++p) {
        const double mp = table.mu(k, p);
        const double np = table.nu(k, p, s);
        mu2 += mp * mp;
        nu2 += np * np;
        for (std::size_t q = p + 1; q < H; ++q) {
          const double d = mp * table.nu(k, q, s) - table.mu(k, q) * np;
          lhs += 2.0 * d * d;
        }
      }
      const double rhs = mu2 * nu2;
      eps = std::min(eps, rhs > 0.0 ? lhs / (2.0 * rhs) : 0.0);
    }
  }
  return eps;
}

std::vector<double> eigen_oracle(std::span<const double> S_in, int n) {
  if (n < 1 || S_in.size() != static_cast<std::size_t>(n) * n) throw ConfigError("eigen_oracle: need an n x n matrix");
  std::vector<double> S(S_in.begin(), S_in.end());
  double fro = 0.0;
  for (double v : S) fro += v * v;
  const double scale = std::max(1.0, std::sqrt(fro));
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      if (std::abs(S[p * n + q] - S[q * n + p]) > 1e-12 * scale) throw ConfigError("eigen_oracle: matrix is not symmetric");
    }
  }
  auto off = [&] {
    double o = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        if (p != q) o += S[p * n + q] * S[p * n + q];
      }
    }
    return std::sqrt(o);
  };
  for (int sweep = 0; sweep < 100 && off() > 1e-12 * scale; ++sweep) {
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = S[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (S[q * n + q] - S[p * n + p]) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int r = 0; r < n; ++r) {
          const double srp = S[r * n + p];
          const double srq = S[r * n + q];
          S[r * n + p] = c * srp - s * srq;
          S[r * n + q] = s * srp + c * srq;
        }
        for (int r = 0; r < n; ++r) {
          const double spr = S[p * n + r];
          const double sqr = S[q * n + r];
          S[p * n + r] = c * spr - s * sqr;
          S[q * n + r] = s * spr + c * sqr;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int p = 0; p < n; ++p) ev[p] = S[p * n + p];
  std::sort(ev.begin(), ev.end());
  return ev;
}

BoundCheck min_eigenvalue_bound_check(const VectorFamily& fam) {
  BoundCheck r;
  const int K = std::max(1, fam.n - 1);
  r.epsilon = fam.t == 0 ? 0.0 : epsilon_condition(build_mu_nu(fam, K));
  double min_col = kInf;
  for (int j = 0; j < fam.n; ++j) min_col = std::min(min_col, fam.column_sum_sq(j));
  r.bound = std::pow(r.epsilon, fam.n - 1) / fam.n * min_col;
  r.lambda_min = eigen_oracle(fam.gram(), fam.n).front();
  r.slack = r.lambda_min - r.bound;
  r.holds = r.lambda_min >= r.bound - 1e-9;
  return r;
}

VectorFamily estimator_excitation_bridge(const SystemSpec& spec, const Trajectory& traj,
                                         std::span<const std::vector<double>> assignments,
                                         const IndicatorParams& params) {
  const int n = spec.n();
  VectorFamily fam(static_cast<int>(assignments.size()), n);
  std::vector<double> phi(spec.m());
  for (std::size_t k = 0; k < assignments.size(); ++k) {
    const auto h = static_cast<std::int64_t>(k + 1);
    if (!spec.theta_box().contains(assignments[k], 1e-12)) {
      throw ConfigError("estimator_excitation_bridge: assignment " + std::to_string(h) + " lies outside Theta");
    }
    if (h > traj.length() || !omega_indicator(traj, h, params)) continue;
    traj.regressor(h, phi);
    const auto g = evaluate_gradient(spec, assignments[k], phi);
    for (int j = 0; j < n; ++j) fam.at(static_cast<int>(k), j) = g[j];
  }
  return fam;
}

VectorFamily random_family(std::uint64_t seed, int max_t, int max_n) {
  const CounterRng rng(seed);
  const int t = 1 + static_cast<int>(rng.bits(0) % static_cast<std::uint64_t>(max_t));
  const int n = 1 + static_cast<int>(rng.bits(1) % static_cast<std::uint64_t>(max_n));
  VectorFamily fam(t, n);
  for (std::size_t e = 0; e < fam.a.size(); ++e) fam.a[e] = 2.0 * rng.uniform(2 + e) - 1.0;
  return fam;
}

std::vector<SpectralRecord> spectral_suite(int instances, std::uint64_t seed, int max_t, int max_n) {
  std::vector<SpectralRecord> out(static_cast<std::size_t>(std::max(0, instances)));
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < instances; ++k) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(k));
    const auto fam = random_family(s, max_t, max_n);
    out[k] = {s, fam.t, fam.n, min_eigenvalue_bound_check(fam)};
  }
  return out;
}

std::string to_jsonl(std::span<const SpectralRecord> records) {
  std::string s;
  for (const auto& r : records) {
    s += "{\"seed\":" + std::to_string(r.seed) + ",\"t\":" + std::to_string(r.t) + ",\"n\":" + std::to_string(r.n) +
         ",\"epsilon\":" + format_double(r.check.epsilon) + ",\"bound\":" + format_double(r.check.bound) +
         ",\"lambda_min\":" + format_double(r.check.lambda_min) + ",\"holds\":" + (r.check.holds ? "true" : "false") +
         "}\n";
  }
  return s;
}

}  // namespace gsid
