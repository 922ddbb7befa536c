#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gsid/excitation.hpp"
#include "gsid/rng.hpp"

using namespace gsid;

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

TEST(GRecursion, LevelOneIsGradient) {
  const SystemSpec sp(SinProduct{}, Box::interval(0.0, kTwoPi));
  EXPECT_DOUBLE_EQ(g_eval(sp, 1, 1, {1, {0.4}, {2.0}}), 2.0 * std::cos(0.8));
}

TEST(GRecursion, PowerBasisClosedForm) {
  const SystemSpec pb(PowerBasis{1, 2}, Box({-1, -1}, {1, 1}));
  EXPECT_EQ(g_eval(pb, 2, 2, {2, {0.1, 0.2, 0.3, 0.4}, {1.0, 2.0}}), 2.0);
}

TEST(GRecursion, AntisymmetryAndDiagonal) {
  const SystemSpec ex(parse_expression("sin(x_1*y_1) + x_2*x_3*y_2 + exp(x_3)*y_1", 3, 2), Box({-1, -1, -1}, {1, 1, 1}));
  const CounterRng rng(17);
  std::uint64_t c = 0;
  for (int k = 0; k < 50; ++k) {
    for (int level = 2; level <= 3; ++level) {
      const std::size_t half_x = (std::size_t{1} << (level - 2)) * 3;
      const std::size_t half_y = (std::size_t{1} << (level - 2)) * 2;
      std::vector<double> x(2 * half_x), y(2 * half_y);
      for (auto& v : x) v = 2.0 * rng.uniform(c++) - 1.0;
      for (auto& v : y) v = 2.0 * rng.uniform(c++) - 1.0;
      std::vector<double> xs(x.begin() + half_x, x.end()), ys(y.begin() + half_y, y.end());
      xs.insert(xs.end(), x.begin(), x.begin() + half_x);
      ys.insert(ys.end(), y.begin(), y.begin() + half_y);
      std::vector<double> xd(x.begin(), x.begin() + half_x), yd(y.begin(), y.begin() + half_y);
      xd.insert(xd.end(), x.begin(), x.begin() + half_x);
      yd.insert(yd.end(), y.begin(), y.begin() + half_y);
      for (int j = level; j <= 3; ++j) {
        const double g = g_eval(ex, level, j, {level, x, y});
        EXPECT_EQ(g_eval(ex, level, j, {level, xs, ys}), -g);
        EXPECT_EQ(g_eval(ex, level, j, {level, xd, yd}), 0.0);
      }
    }
  }
}

TEST(GRecursion, RejectsBadArguments) {
  const SystemSpec pb(PowerBasis{1, 2}, Box({-1, -1}, {1, 1}));
  EXPECT_THROW(g_eval(pb, 2, 1, {2, {0, 0, 0, 0}, {1, 2}}), ConfigError);
  EXPECT_THROW(g_eval(pb, 2, 2, {2, {0, 0}, {1, 2}}), ConfigError);
}

TEST(Membership, SinProductExamples) {
  const SystemSpec sp(SinProduct{}, Box::interval(0.0, kTwoPi));
  const auto r8 = p_prime_membership(sp, std::vector{0.125}, 513);
  EXPECT_EQ(r8.verdict, Verdict::Member);
  ASSERT_TRUE(r8.analytic_min.has_value());
  EXPECT_NEAR(*r8.analytic_min, 0.125 * std::sqrt(0.5), 1e-15);
  EXPECT_GE(r8.min_abs_g, *r8.analytic_min - 1e-15);
  const auto r1 = p_prime_membership(sp, std::vector{1.0}, 513);
  EXPECT_EQ(r1.verdict, Verdict::NonmemberAtSample);
  EXPECT_TRUE(r1.sign_change);
  EXPECT_EQ(*r1.analytic_min, 0.0);
}

TEST(Membership, ConstantModelNeverMember) {
  const SystemSpec flat(parse_expression("y_1", 1, 1), Box::interval(0.0, 1.0));
  for (double b : {-2.0, 0.5, 3.0}) {
    EXPECT_EQ(p_prime_membership(flat, std::vector{b}, 33).verdict, Verdict::NonmemberAtSample);
  }
}

TEST(Membership, PowerBasisUndecidedBand) {
  // g = y1 ybar^2 - ybar y1^2; near-zero but not below tol/10 is undecided.
  const SystemSpec pb(PowerBasis{1, 2}, Box({-1, -1}, {1, 1}));
  EXPECT_EQ(p_prime_membership(pb, std::vector{1.0, 2.0}, 5).verdict, Verdict::Member);
  const double eps = 1e-4;  // g = 1 * (1+e)^2 - (1+e) = e + e^2
  EXPECT_EQ(p_prime_membership(pb, std::vector{1.0, 1.0 + eps}, 5, 1e-3).verdict, Verdict::Undecided);
  EXPECT_EQ(p_prime_membership(pb, std::vector{1.0, 1.0}, 5).verdict, Verdict::NonmemberAtSample);
}

TEST(ExcitationPoint, RemarkExamples) {
  const SystemSpec pr(PiecewiseRemark{1.0}, Box::interval(1.0, 2.0));
  EXPECT_FALSE(excitation_point_simple(pr, std::vector{1.0}, std::vector{2.0}, std::vector{0.5, 7.0}));
  EXPECT_TRUE(excitation_point_simple(pr, std::vector{1.0}, std::vector{2.0}, std::vector{2.0, 7.0}));
  EXPECT_THROW(excitation_point_simple(pr, std::vector{1.0}, std::vector{1.0}, std::vector{2.0, 0.0}), ConfigError);
}

TEST(ExcitationSet, RemarkDeadZone) {
  const SystemSpec pr(PiecewiseRemark{0.75}, Box::interval(1.0, 2.0));
  const auto e = excitation_set_1d(pr, std::vector{1.0}, std::vector{2.0}, std::vector{0.0, 0.0}, 0, {-2.0, 2.0}, 101,
                                   0.0);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].lo, -2.0);
  EXPECT_NEAR(e[0].hi, -0.75, 1e-15);
  EXPECT_NEAR(e[1].lo, 0.75, 1e-15);
  EXPECT_EQ(e[1].hi, 2.0);
}

TEST(Scan, ReportAndDensity) {
  const SystemSpec sp(SinProduct{}, Box::interval(0.0, kTwoPi));
  const auto rep = excitation_scan(sp, Box::interval(0.0, 0.5), 11, 257);
  ASSERT_EQ(rep.records.size(), 11u);
  // beta = 0 gives g = 0; small positive beta are members.
  EXPECT_EQ(rep.records[0].verdict, Verdict::NonmemberAtSample);
  EXPECT_EQ(rep.records[1].verdict, Verdict::Member);
  EXPECT_GT(rep.density_estimate, 0.0);
  const auto js = rep.to_json();
  EXPECT_NE(js.find("\"verdict\":\"member\""), std::string::npos);
  EXPECT_NE(js.find("\"lower_density\""), std::string::npos);
}
