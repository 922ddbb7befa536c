#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "gsid/rng.hpp"
#include "gsid/system.hpp"

using namespace gsid;

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;

SystemSpec sin_product() { return SystemSpec(SinProduct{}, Box::interval(0.0, kTwoPi)); }

}  // namespace

TEST(Model, CatalogValues) {
  EXPECT_EQ(evaluate_model(sin_product(), std::vector{0.0}, std::vector{5.0}), 0.0);
  const SystemSpec pb(PowerBasis{1, 2}, Box({0, 0}, {3, 3}));
  EXPECT_EQ(evaluate_model(pb, std::vector{1.0, 2.0}, std::vector{3.0}), 21.0);
  const SystemSpec pr(PiecewiseRemark{1.0}, Box::interval(1.0, 2.0));
  EXPECT_EQ(evaluate_model(pr, std::vector{1.5}, std::vector{0.5, 123.0}), 0.0);
  EXPECT_EQ(evaluate_model(pr, std::vector{1.5}, std::vector{3.0, 0.0}), 3.0);
  EXPECT_EQ(evaluate_model(pr, std::vector{1.5}, std::vector{-3.0, 0.0}), -3.0);
}

TEST(Model, CatalogGradients) {
  EXPECT_EQ(evaluate_gradient(sin_product(), std::vector{0.0}, std::vector{5.0})[0], 5.0);
  const SystemSpec pb(PowerBasis{1, 2}, Box({0, 0}, {3, 3}));
  const auto g = evaluate_gradient(pb, std::vector{1.0, 2.0}, std::vector{3.0});
  EXPECT_EQ(g[0], 3.0);
  EXPECT_EQ(g[1], 9.0);
  const SystemSpec pr(PiecewiseRemark{1.0}, Box::interval(1.0, 2.0));
  EXPECT_EQ(evaluate_gradient(pr, std::vector{1.5}, std::vector{0.0, 0.0})[0], 0.0);
}

TEST(Model, AnalyticGradientMatchesFiniteDifference) {
  const std::vector<SystemSpec> specs{
      sin_product(),
      SystemSpec(PowerBasis{1, 3}, Box({-2, -2}, {2, 2})),
      SystemSpec(PowerBasis{-1, 2}, Box({-2, -2}, {2, 2})),
      SystemSpec(PiecewiseRemark{1.0}, Box::interval(1.0, 2.0)),
  };
  const CounterRng rng(11);
  std::uint64_t c = 0;
  for (const auto& spec : specs) {
    const SystemSpec fd(spec.model(), spec.theta_box(), GradientMode::FiniteDifference);
    for (int k = 0; k < 100; ++k) {
      std::vector<double> x(spec.n()), z(spec.m());
      for (int j = 0; j < spec.n(); ++j) {
        x[j] = spec.theta_box().lower[j] + spec.theta_box().side(j) * rng.uniform(c++);
      }
      for (auto& v : z) v = -5.0 + 10.0 * rng.uniform(c++);
      // keep away from the kinks and the pole
      if (std::holds_alternative<PiecewiseRemark>(spec.model()) && std::abs(std::abs(z[0]) - 1.0) < 1e-3) continue;
      if (std::abs(z[0]) < 1e-2) continue;
      const auto ga = evaluate_gradient(spec, x, z);
      const auto gf = evaluate_gradient(fd, x, z);
      for (int j = 0; j < spec.n(); ++j) {
        EXPECT_NEAR(ga[j], gf[j], 1e-5 * std::max(1.0, std::abs(ga[j]))) << spec.model_name() << " k=" << k;
      }
    }
  }
}

TEST(Model, ConstantInXHasZeroGradient) {
  const SystemSpec e(parse_expression("y_1*y_1 + 3", 1, 1), Box::interval(0.0, 1.0));
  EXPECT_NEAR(evaluate_gradient(e, std::vector{0.3}, std::vector{0.0})[0], 0.0, 1e-12);
}

TEST(Model, Validation) {
  EXPECT_THROW(SystemSpec(SinProduct{}, Box::interval(1.0, 1.0)), ConfigError);
  EXPECT_THROW(SystemSpec(PowerBasis{2, 2}, Box({0, 0}, {1, 1})), ConfigError);
  EXPECT_THROW(SystemSpec(PiecewiseRemark{kInf}, Box::interval(1.0, 2.0)), ConfigError);
  EXPECT_THROW(NoiseSpec(StudentT{8.0, 1.0}, 8.0), ConfigError);
}

TEST(Noise, SupportAndVariance) {
  EXPECT_EQ(NoiseSpec(UniformSymmetric{2.0}).support(), 2.0);
  EXPECT_TRUE(std::isinf(NoiseSpec(Gaussian{1.0}).support()));
  EXPECT_TRUE(std::isinf(NoiseSpec(StudentT{10.0, 1.0}).support()));
  EXPECT_DOUBLE_EQ(NoiseSpec(UniformSymmetric{3.0}).variance(), 3.0);
  EXPECT_DOUBLE_EQ(NoiseSpec(Gaussian{0.5}).variance(), 0.25);
  EXPECT_DOUBLE_EQ(NoiseSpec(StudentT{10.0, 2.0}).variance(), 4.0 * 10.0 / 8.0);
  EXPECT_DOUBLE_EQ(NoiseSpec(Gaussian{0.5}).fourth_central_of_square(), 2.0 * 0.0625);
}

TEST(Noise, Moments) {
  const std::vector<NoiseSpec> families{NoiseSpec(UniformSymmetric{1.5}), NoiseSpec(Gaussian{0.7}),
                                        NoiseSpec(StudentT{12.0, 0.5}, 8.0)};
  constexpr int kDraws = 1'000'000;
  for (const auto& nz : families) {
    double s = 0.0;
    double s2 = 0.0;
    for (int t = 1; t <= kDraws; ++t) {
      const double w = nz.draw(77, t);
      s += w;
      s2 += w * w;
    }
    const double mean = s / kDraws;
    const double var = s2 / kDraws - mean * mean;
    const double sigma = std::sqrt(nz.variance());
    EXPECT_LE(std::abs(mean), 4.0 * sigma / 1e3);
    EXPECT_NEAR(var, nz.variance(), 0.01 * nz.variance());
  }
}

TEST(Noise, UniformStaysInSupport) {
  const NoiseSpec nz(UniformSymmetric{0.5});
  for (int t = 1; t < 10000; ++t) EXPECT_LE(std::abs(nz.draw(3, t)), 0.5);
}

TEST(Input, Policies) {
  EXPECT_EQ(InputPolicy::zero().at(5), 0.0);
  EXPECT_EQ(InputPolicy::constant(2.0, 1.0).at(3), 1.0);
  EXPECT_EQ(InputPolicy::constant(-2.0, 1.0).at(3), -1.0);
  EXPECT_NEAR(InputPolicy::sine_sweep(2.0, 4.0).at(1), 2.0, 1e-15);
  const auto p = InputPolicy::playback({1.0, -3.0}, 2.0);
  EXPECT_EQ(p.at(0), 1.0);
  EXPECT_EQ(p.at(1), -2.0);
  EXPECT_EQ(p.at(2), 0.0);
}

TEST(Simulate, ZeroModelGivesZeros) {
  const SystemSpec spec(parse_expression("0", 1, 1), Box::interval(0.0, 1.0));
  const auto tr = simulate(spec, NoiseSpec(Gaussian{0.0}), std::vector{0.5}, InputPolicy::zero(), {}, 50, 9);
  for (double y : tr.y) EXPECT_EQ(y, 0.0);
  EXPECT_EQ(tr.to_jsonl().find("-0"), std::string::npos);
}

TEST(Simulate, RecursionIsExact) {
  const SystemSpec spec(PowerBasis{1, 2}, Box({-1, -1}, {1, 1}));
  const std::vector<double> theta{0.3, -0.2};
  const auto tr = simulate(spec, NoiseSpec(Gaussian{0.3}), theta, InputPolicy::sine_sweep(0.5, 7.0), {}, 500, 4);
  ASSERT_FALSE(tr.unstable);
  for (std::int64_t t = 0; t < tr.length(); ++t) {
    const auto phi = tr.regressor(t);
    EXPECT_EQ(tr.y[t + 1], (evaluate_model(spec, theta, phi) + tr.u[t]) + tr.w[t + 1]);
  }
}

TEST(Simulate, RegressorIsSlidingWindow) {
  const SystemSpec spec(PiecewiseRemark{0.1}, Box::interval(1.0, 2.0));
  const auto tr = simulate(spec, NoiseSpec(UniformSymmetric{0.1}), std::vector{1.5}, InputPolicy::constant(0.05),
                           std::vector{0.7, -0.4}, 20, 8);
  EXPECT_EQ(tr.regressor(0), (std::vector{0.7, -0.4}));
  for (std::int64_t t = 1; t <= tr.length(); ++t) EXPECT_EQ(tr.regressor(t), (std::vector{tr.y[t], tr.y[t - 1]}));
}

TEST(Simulate, Deterministic) {
  const auto a = simulate(sin_product(), NoiseSpec(Gaussian{0.5}), std::vector{1.3}, InputPolicy::zero(), {}, 300, 5);
  const auto b = simulate(sin_product(), NoiseSpec(Gaussian{0.5}), std::vector{1.3}, InputPolicy::zero(), {}, 300, 5);
  const auto c = simulate(sin_product(), NoiseSpec(Gaussian{0.5}), std::vector{1.3}, InputPolicy::zero(), {}, 300, 6);
  EXPECT_EQ(a.to_jsonl(), b.to_jsonl());
  EXPECT_NE(a.to_jsonl(), c.to_jsonl());
}

TEST(Simulate, RemarkTrajectoriesCoincide) {
  const SystemSpec spec(PiecewiseRemark{1.0}, Box::interval(1.0, 2.0));
  const NoiseSpec nz(UniformSymmetric{1.0});
  const auto a = simulate(spec, nz, std::vector{1.0}, InputPolicy::zero(), std::vector{0.0, 0.0}, 1000, 12);
  const auto b = simulate(spec, nz, std::vector{2.0}, InputPolicy::zero(), std::vector{0.0, 0.0}, 1000, 12);
  EXPECT_EQ(a.to_jsonl(), b.to_jsonl());
}

TEST(Simulate, BlowUpIsFlagged) {
  const SystemSpec spec(PowerBasis{1, 2}, Box({0, 0}, {2, 2}));
  const auto tr = simulate(spec, NoiseSpec(Gaussian{0.0}), std::vector{2.0, 2.0}, InputPolicy::zero(), std::vector{1.0},
                           200, 1);
  EXPECT_TRUE(tr.unstable);
  EXPECT_LT(tr.length(), 200);
  for (double y : tr.y) EXPECT_TRUE(std::isfinite(y));
}

TEST(Simulate, MatchesReferenceOracle) {
  std::ifstream in(GSID_GOLDEN_DIR "/sin_product_seed42.json");
  ASSERT_TRUE(in.good());
  const auto g = nlohmann::json::parse(in);
  const auto tr = simulate(sin_product(), NoiseSpec(Gaussian{g["sigma"].get<double>()}),
                           std::vector{g["theta"].get<double>()}, InputPolicy::zero(), {}, g["T"].get<int>(),
                           g["seed"].get<std::uint64_t>());
  ASSERT_EQ(tr.y.size(), g["y"].size());
  for (std::size_t t = 0; t < tr.y.size(); ++t) {
    EXPECT_NEAR(tr.y[t], g["y"][t].get<double>(), 1e-13) << "t=" << t;
    EXPECT_NEAR(tr.w[t], g["w"][t].get<double>(), 1e-13) << "t=" << t;
  }
}
