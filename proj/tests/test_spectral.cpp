#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gsid/rng.hpp"
#include "gsid/spectral.hpp"
#include "linalg_oracle.hpp"

using namespace gsid;

namespace {

VectorFamily identity_rows() { return VectorFamily(2, 2, {1, 0, 0, 1}); }

VectorFamily random_rows(std::uint64_t seed, int t, int n) {
  const CounterRng rng(seed);
  VectorFamily f(t, n);
  for (std::size_t e = 0; e < f.a.size(); ++e) f.a[e] = 2.0 * rng.uniform(e) - 1.0;
  return f;
}

// Direct recursion over explicit index tuples, summing in reverse order.
double direct_nu(const VectorFamily& f, int k, const std::vector<int>& leaves, int s) {
  if (k == 1) return f.at(leaves[0], s - 1);
  const std::size_t h = leaves.size() / 2;
  const std::vector<int> p(leaves.begin(), leaves.begin() + h), q(leaves.begin() + h, leaves.end());
  return direct_nu(f, k - 1, p, k - 1) * direct_nu(f, k - 1, q, s) -
         direct_nu(f, k - 1, q, k - 1) * direct_nu(f, k - 1, p, s);
}

bool rel_close(double a, double b, double tol, double scale) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), scale});
}

}  // namespace

TEST(Hierarchy, Sizes) {
  EXPECT_EQ(hierarchy_size(6, 1), 6u);
  EXPECT_EQ(hierarchy_size(6, 2), 15u);
  EXPECT_EQ(hierarchy_size(6, 3), 105u);
  const auto h = build_hierarchy(4, 3);
  EXPECT_EQ(h.size(2), 6u);
  EXPECT_EQ(h.size(3), 15u);
  EXPECT_EQ(h.levels[0].front(), (std::pair<std::int32_t, std::int32_t>{0, 1}));
  EXPECT_EQ(h.levels[0].back(), (std::pair<std::int32_t, std::int32_t>{2, 3}));
  try {
    build_hierarchy(40, 3);
    FAIL();
  } catch (const CapExceeded& e) {
    EXPECT_EQ(e.requested(), hierarchy_size(40, 3));
  }
}

TEST(MuNu, IdentityRows) {
  const auto tab = build_mu_nu(identity_rows(), 2);
  EXPECT_EQ(tab.mu(2, 0), 1.0);
  EXPECT_EQ(tab.mu(1, 0), 1.0);
  EXPECT_EQ(tab.nu(1, 1, 2), 1.0);
}

TEST(MuNu, DuplicatedRows) {
  const auto tab = build_mu_nu(VectorFamily(2, 2, {0.3, 0.7, 0.3, 0.7}), 2);
  EXPECT_EQ(tab.mu(2, 0), 0.0);
}

TEST(MuNu, MatchesDirectRecursion) {
  const auto f = random_rows(5, 4, 3);
  const auto tab = build_mu_nu(f, 3);
  // Expand every level-3 element into its leaf tuple.
  const auto& h = tab.hierarchy;
  for (std::size_t e = 0; e < h.size(3); ++e) {
    const auto [p, q] = h.levels[1][e];
    const auto [a, b] = h.levels[0][p];
    const auto [c, d] = h.levels[0][q];
    const std::vector<int> leaves{a, b, c, d};
    EXPECT_NEAR(tab.mu(3, e), direct_nu(f, 3, leaves, 3), 1e-12);
  }
  for (std::size_t e = 0; e < h.size(2); ++e) {
    const auto [a, b] = h.levels[0][e];
    for (int s = 2; s <= 3; ++s) EXPECT_NEAR(tab.nu(2, e, s), direct_nu(f, 2, {a, b}, s), 1e-12);
  }
}

TEST(Minor, Examples) {
  const auto f = random_rows(9, 5, 3);
  const auto tab = build_mu_nu(f, 3);
  EXPECT_DOUBLE_EQ(minor_via_decomposition(tab, 1), f.column_sum_sq(0));
  EXPECT_DOUBLE_EQ(minor_via_decomposition(build_mu_nu(identity_rows(), 2), 2), 1.0);
  const auto S = oracle::gram(f.a, f.t, f.n);
  const double ref = oracle::leading_minor(S, 3, 3);
  EXPECT_TRUE(rel_close(minor_via_decomposition(tab, 3), ref, 1e-9, 0.0));
}

TEST(Minor, ZeroDenominatorNamesLevel) {
  const auto tab = build_mu_nu(VectorFamily(3, 3, {0, 1, 2, 0, 3, 1, 0, -1, 1}), 3);
  try {
    minor_via_decomposition(tab, 3);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("level 1"), std::string::npos);
  }
}

TEST(Minor, DecompositionIdentity) {
  for (int k = 0; k < 300; ++k) {
    const auto f = random_family(derive_seed(71, k));
    const auto tab = build_mu_nu(f, f.n);
    const auto S = oracle::gram(f.a, f.t, f.n);
    double scale = 1.0;
    for (int level = 1; level <= f.n; ++level) {
      scale *= S[(level - 1) * f.n + level - 1];
      EXPECT_TRUE(rel_close(minor_via_decomposition(tab, level), oracle::leading_minor(S, f.n, level), 1e-9, scale))
          << "seed " << k << " level " << level;
    }
  }
}

TEST(Minor, CofactorIdentity) {
  for (int k = 0; k < 300; ++k) {
    const auto f = random_family(derive_seed(72, k));
    if (f.n < 2) continue;
    const auto tab = build_mu_nu(f, f.n);
    const auto S = oracle::gram(f.a, f.t, f.n);
    for (int level = 1; level < f.n; ++level) {
      std::vector<int> idx;
      double scale = 1.0;
      for (int j = 0; j <= level; ++j) {
        if (j == level - 1) continue;
        idx.push_back(j);
        scale *= S[j * f.n + j];
      }
      const double ref = oracle::det(oracle::principal(S, f.n, idx), static_cast<int>(idx.size()));
      EXPECT_TRUE(rel_close(cofactor_via_decomposition(tab, level), ref, 1e-9, scale)) << "seed " << k;
    }
  }
}

TEST(Epsilon, Examples) {
  EXPECT_DOUBLE_EQ(epsilon_condition(build_mu_nu(identity_rows(), 1)), 1.0);
  const VectorFamily collinear(3, 2, {1, 2, -0.5, -1, 3, 6});
  EXPECT_EQ(epsilon_condition(build_mu_nu(collinear, 1)), 0.0);
  EXPECT_EQ(epsilon_condition(build_mu_nu(VectorFamily(2, 1, {1, 2}), 1)), 1.0);
}

TEST(Epsilon, MatchesDoubleLoop) {
  for (int k = 0; k < 20; ++k) {
    const auto f = random_rows(derive_seed(73, k), 4, 2);
    double lhs = 0.0;
    double rhs = 0.0;
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; q < 4; ++q) {
        const double d = f.at(p, 0) * f.at(q, 1) - f.at(q, 0) * f.at(p, 1);
        lhs += d * d;
        rhs += f.at(p, 0) * f.at(p, 0) * f.at(q, 1) * f.at(q, 1);
      }
    }
    EXPECT_NEAR(epsilon_condition(build_mu_nu(f, 1)), lhs / (2.0 * rhs), 1e-12);
  }
}

TEST(Eigen, Examples) {
  EXPECT_EQ(eigen_oracle(std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1}, 3), (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(eigen_oracle(std::vector<double>{9, 0, 0, 0, 1, 0, 0, 0, 4}, 3), (std::vector<double>{1, 4, 9}));
  EXPECT_THROW(eigen_oracle(std::vector<double>{1, 2, 3, 4}, 2), ConfigError);
}

TEST(Eigen, CharacteristicPolynomial) {
  const CounterRng rng(74);
  std::uint64_t c = 0;
  for (int k = 0; k < 100; ++k) {
    std::vector<double> S(9);
    for (int p = 0; p < 3; ++p) {
      for (int q = p; q < 3; ++q) S[p * 3 + q] = S[q * 3 + p] = 4.0 * rng.uniform(c++) - 2.0;
    }
    const auto ev = eigen_oracle(S, 3);
    double fro = 0.0;
    for (double v : S) fro += v * v;
    fro = std::sqrt(fro);
    EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end()));
    EXPECT_NEAR(ev[0] + ev[1] + ev[2], S[0] + S[4] + S[8], 1e-9);
    for (double l : ev) EXPECT_LE(std::abs(oracle::char_poly(S, 3, l)), 1e-8 * fro * fro * fro);
  }
}

TEST(Bound, Examples) {
  const auto id = min_eigenvalue_bound_check(identity_rows());
  EXPECT_DOUBLE_EQ(id.epsilon, 1.0);
  EXPECT_DOUBLE_EQ(id.bound, 0.5);
  EXPECT_NEAR(id.lambda_min, 1.0, 1e-15);
  EXPECT_TRUE(id.holds);
  const auto col = min_eigenvalue_bound_check(VectorFamily(3, 2, {1, 2, -0.5, -1, 3, 6}));
  EXPECT_EQ(col.epsilon, 0.0);
  EXPECT_EQ(col.bound, 0.0);
  EXPECT_TRUE(col.holds);
}

TEST(Bound, RandomSuiteHolds) {
  const auto recs = spectral_suite(200, 75);
  for (const auto& r : recs) EXPECT_TRUE(r.check.holds) << "seed " << r.seed;
  const auto js = to_jsonl(recs);
  EXPECT_EQ(std::count(js.begin(), js.end(), '\n'), 200);
  EXPECT_EQ(js, to_jsonl(spectral_suite(200, 75)));
}

TEST(Bound, PermutationSafety) {
  for (int k = 0; k < 100; ++k) {
    auto f = random_family(derive_seed(76, k));
    if (f.t < 2) continue;
    const auto a = min_eigenvalue_bound_check(f);
    const auto tab = build_mu_nu(f, f.n);
    std::vector<double> minors;
    for (int level = 1; level <= f.n; ++level) minors.push_back(minor_via_decomposition(tab, level));
    VectorFamily g(f.t, f.n);
    for (int i = 0; i < f.t; ++i) {
      for (int j = 0; j < f.n; ++j) g.at(i, j) = f.at((i + 1) % f.t, j);
    }
    const auto b = min_eigenvalue_bound_check(g);
    EXPECT_NEAR(a.epsilon, b.epsilon, 1e-12);
    EXPECT_NEAR(a.lambda_min, b.lambda_min, 1e-12);
    const auto tg = build_mu_nu(g, g.n);
    for (int level = 1; level <= f.n; ++level) EXPECT_NEAR(minor_via_decomposition(tg, level), minors[level - 1], 1e-12);
  }
}

TEST(Bridge, ZeroIndicators) {
  const SystemSpec sp(SinProduct{}, Box::interval(0.0, 2.0 * std::numbers::pi));
  const auto tr = simulate(sp, NoiseSpec(Gaussian{0.5}), std::vector{1.3}, InputPolicy::zero(), {}, 20, 1);
  const std::vector<std::vector<double>> th(20, std::vector{1.0});
  const auto fam = estimator_excitation_bridge(sp, tr, th, {1e-9, kInf, kInf});
  for (double v : fam.a) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(min_eigenvalue_bound_check(fam).lambda_min, 0.0);
}

TEST(Bridge, ConstantRegressorIsRankOne) {
  const SystemSpec pb(PowerBasis{1, 2}, Box({-1, -1}, {1, 1}));
  const auto tr = simulate(pb, NoiseSpec(Gaussian{0.0}), std::vector{0.0, 0.0}, InputPolicy::constant(0.7),
                           std::vector{0.7}, 30, 1);
  const std::vector<std::vector<double>> th(30, std::vector{0.0, 0.0});
  const auto fam = estimator_excitation_bridge(pb, tr, th, {3.0, kInf, kInf});
  EXPECT_NEAR(min_eigenvalue_bound_check(fam).lambda_min, 0.0, 1e-12);
}

TEST(Bridge, GrowthWithEta) {
  const SystemSpec sp(SinProduct{}, Box::interval(0.0, 2.0 * std::numbers::pi));
  const auto tr = simulate(sp, NoiseSpec(Gaussian{0.5}), std::vector{1.3}, InputPolicy::zero(), {}, 64, 3);
  const IndicatorParams ip{3.0, kInf, kInf};
  std::vector<double> ratios;
  for (int t : {16, 32, 64}) {
    const std::vector<std::vector<double>> th(t, std::vector{1.3});
    const auto fam = estimator_excitation_bridge(sp, tr, th, ip);
    std::int64_t eta = 0;
    for (int i = 1; i <= t; ++i) eta += omega_indicator(tr, i, ip) ? 1 : 0;
    ratios.push_back(min_eigenvalue_bound_check(fam).lambda_min / static_cast<double>(eta));
  }
  for (double r : ratios) EXPECT_GT(r, 0.01);
}
