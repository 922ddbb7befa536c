#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsid/common.hpp"
#include "gsid/estimator.hpp"
#include "gsid/system.hpp"

namespace gsid {

/// t vectors a_i in R^n, stored row-major.
struct VectorFamily {
  int t = 0;
  int n = 0;
  std::vector<double> a;

  VectorFamily() = default;
  VectorFamily(int t_, int n_) : t(t_), n(n_), a(static_cast<std::size_t>(t_) * n_, 0.0) {}
  VectorFamily(int t_, int n_, std::vector<double> rows);

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
  std::span<const double> row(int i) const { return {a.data() + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n)}; }

  /// sum_i a_{i,j}^2 for column j (0-based).
  double column_sum_sq(int j) const;
  /// sum_i a_i a_i^T, row-major n x n.
  std::vector<double> gram() const;
};

inline constexpr std::size_t kHierarchyCap = 100000;

/// H^t_1 = {1..t}; H^t_k = pairs (p, q) of H^t_{k-1} elements with p before q.
/// Elements are stored as indices into the previous level, in lexicographic order.
struct IndexHierarchy {
  int t = 0;
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> levels;  // levels[k-2] is H^t_k

  std::size_t size(int k) const { return k == 1 ? static_cast<std::size_t>(t) : levels[k - 2].size(); }
};

/// |H^t_k| without building it (saturates at SIZE_MAX).
std::size_t hierarchy_size(int t, int k);

/// Throws CapExceeded when some |H^t_k| > cap.
IndexHierarchy build_hierarchy(int t, int K, std::size_t cap = kHierarchyCap);

/// vals[k-1][h * (n - k + 1) + (s - k)] = nu_{h,s}(k) for s in [k, n];
/// mu_h(k) = nu_{h,k}(k).
struct MuNuTable {
  int n = 0;
  int levels = 0;
  IndexHierarchy hierarchy;
  std::vector<std::vector<double>> vals;

  std::size_t size(int k) const { return hierarchy.size(k); }
  double mu(int k, std::size_t h) const { return nu(k, h, k); }
  double nu(int k, std::size_t h, int s) const {
    return vals[k - 1][h * static_cast<std::size_t>(n - k + 1) + static_cast<std::size_t>(s - k)];
  }
  /// sum_h mu_h(k)^2.
  double mu_sq_sum(int k) const;
};

MuNuTable build_mu_nu(const VectorFamily& fam, int K, std::size_t cap = kHierarchyCap);

/// k-th leading principal minor of sum a a^T from the closed form
/// S_k / prod_{j<k} S_j^{k-j-1}, S_j = sum_h mu_h(j)^2. Throws DomainError
/// naming j when some S_j vanishes.
double minor_via_decomposition(const MuNuTable& table, int k);

/// (k, k) cofactor of the (k+1)-th leading minor: sum_h nu_{h,k+1}(k)^2 over
/// the same denominator.
double cofactor_via_decomposition(const MuNuTable& table, int k);

/// min over k in [1, n-1], s in [k+1, n] of
/// sum_{p,q} (mu_p nu_{q,s} - mu_q nu_{p,s})^2 / (2 sum_{p,q} mu_p^2 nu_{q,s}^2),
/// with 0 when a denominator vanishes. Needs levels through n - 1; 1 when n = 1.
double epsilon_condition(const MuNuTable& table);

/// Eigenvalues of a symmetric matrix (row-major), ascending, by cyclic Jacobi
/// rotations. Throws ConfigError if S is not symmetric.
std::vector<double> eigen_oracle(std::span<const double> S, int n);

struct BoundCheck {
  double epsilon = 0.0;
  double bound = 0.0;
  double lambda_min = 0.0;
  bool holds = false;
  double slack = 0.0;  // lambda_min - bound
};

/// epsilon^{n-1} / n * min_j sum_i a_ij^2 against lambda_min(sum a a^T).
BoundCheck min_eigenvalue_bound_check(const VectorFamily& fam);

/// Rows a_h = df/dx(theta_h, phi_h) I_h for h = 1..assignments.size().
VectorFamily estimator_excitation_bridge(const SystemSpec& spec, const Trajectory& traj,
                                         std::span<const std::vector<double>> assignments,
                                         const IndicatorParams& params);

/// A random family with t in [1, max_t], n in [1, max_n] and entries on
/// [-1, 1], fully determined by `seed`.
VectorFamily random_family(std::uint64_t seed, int max_t = 6, int max_n = 3);

struct SpectralRecord {
  std::uint64_t seed = 0;
  int t = 0;
  int n = 0;
  BoundCheck check;
};

/// `instances` random families seeded derive_seed(seed, k); parallel over instances.
std::vector<SpectralRecord> spectral_suite(int instances, std::uint64_t seed, int max_t = 6, int max_n = 3);

/// One JSON object per line: {seed, t, n, epsilon, bound, lambda_min, holds}.
std::string to_jsonl(std::span<const SpectralRecord> records);

}  // namespace gsid
