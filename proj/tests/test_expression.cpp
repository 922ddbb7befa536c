#include <gtest/gtest.h>

#include <cmath>

#include "gsid/expression.hpp"
#include "gsid/rng.hpp"
#include "gsid/system.hpp"

using namespace gsid;

TEST(Expression, SinProductEquivalent) {
  const auto e = Expression::parse("sin(x_1*y_1)");
  Expression ref;
  const int x = ref.add_node({Op::VarX, 0.0, 1});
  const int y = ref.add_node({Op::VarY, 0.0, 1});
  const int mul = ref.add_node({Op::Mul, 0.0, 0, x, y});
  ref.set_root(ref.add_node({Op::Sin, 0.0, 0, mul}));
  EXPECT_EQ(e, ref);
  EXPECT_EQ(e.evaluate(std::vector{0.7}, std::vector{2.0}), std::sin(1.4));
}

TEST(Expression, PowerBasisEquivalent) {
  const auto e = Expression::parse("x_1*y_1^1 + x_2*y_1^2");
  EXPECT_EQ(e.max_x_index(), 2);
  EXPECT_EQ(e.max_y_index(), 1);
  const SystemSpec pb(PowerBasis{1, 2}, Box({-5, -5}, {5, 5}));
  const CounterRng rng(5);
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> x{rng.uniform(3 * k) * 4 - 2, rng.uniform(3 * k + 1) * 4 - 2};
    const std::vector<double> z{rng.uniform(3 * k + 2) * 6 - 3};
    EXPECT_NEAR(e.evaluate(x, z), evaluate_model(pb, x, z), 1e-12);
  }
}

TEST(Expression, ErrorOffsets) {
  try {
    Expression::parse("x_1*(");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 5u);
  }
  try {
    Expression::parse("2 + foo");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
  EXPECT_THROW(Expression::parse("x_0"), ParseError);
  EXPECT_THROW(Expression::parse("1 +"), ParseError);
  EXPECT_THROW(Expression::parse("(1"), ParseError);
  EXPECT_THROW(Expression::parse("1 2"), ParseError);
}

TEST(Expression, Precedence) {
  const std::vector<double> none;
  EXPECT_EQ(Expression::parse("2+3*4").evaluate(none, none), 14.0);
  EXPECT_EQ(Expression::parse("2^3^2").evaluate(none, none), 512.0);
  EXPECT_EQ(Expression::parse("-2^2").evaluate(none, none), -4.0);
  EXPECT_EQ(Expression::parse("8/4/2").evaluate(none, none), 1.0);
  EXPECT_EQ(Expression::parse("2-3-4").evaluate(none, none), -5.0);
  EXPECT_NEAR(Expression::parse("exp(1)").evaluate(none, none), std::exp(1.0), 1e-15);
}

TEST(Expression, DomainErrors) {
  const std::vector<double> x{0.0};
  EXPECT_THROW(Expression::parse("1/x_1").evaluate(x, x), DomainError);
  EXPECT_THROW(Expression::parse("x_1^(-1)").evaluate(x, x), DomainError);
  EXPECT_THROW(Expression::parse("(x_1-1)^0.5").evaluate(x, x), DomainError);
}

TEST(Expression, RoundTrip) {
  const std::vector<std::string> sources{
      "sin(x_1*y_1)", "x_1*y_1^1 + x_2*y_1^2", "-x_1 - -y_2", "exp(cos(x_1)/(1+y_1^2))", "2^-3", "1.5e-3*x_2",
      "((x_1))", "x_1-y_1-y_2", "x_1/(y_1*y_2)",
  };
  for (const auto& s : sources) {
    const auto e = Expression::parse(s);
    const auto again = Expression::parse(e.to_string());
    EXPECT_EQ(e, again) << s << " -> " << e.to_string();
    EXPECT_EQ(again.to_string(), e.to_string());
  }
}

TEST(Expression, DeclaredDimensions) {
  EXPECT_THROW(parse_expression("x_2*y_1", 1, 1), ConfigError);
  const auto e = parse_expression("x_1", 2, 3);
  EXPECT_EQ(e.n, 2);
  EXPECT_EQ(e.m, 3);
}
