#include <gtest/gtest.h>

#include "mframe/expr.hpp"
#include "mframe/format.hpp"
#include "mframe/numeric.hpp"
#include "mframe/parse.hpp"

using namespace mframe::symexpr;

namespace {

SymbolRegistry jet_registry() {
  SymbolRegistry r;
  r.add(SymbolKind::Independent, "x");
  r.add(SymbolKind::Jet, "u", true);
  r.add(SymbolKind::Generator, "sigma", true);
  r.add(SymbolKind::Generator, "kappa", true);
  r.add(SymbolKind::Parameter, "theta");
  for (auto n : {"a", "b", "c", "d"}) r.add(SymbolKind::Parameter, n);
  return r;
}

Expr P(const std::string& s) {
  static SymbolRegistry r = jet_registry();
  return parse(s, r);
}

}  // namespace

TEST(Symexpr, ParsesAndCanonicalizes) {
  EXPECT_EQ(P("x + x"), P("2*x"));
  EXPECT_TRUE(P("(u_x^2 - u_x^2)/u").is_zero());
  EXPECT_EQ(P("sigma_x^2/2"), Expr(Rational(1, 2)) * sym(SymbolKind::Generator, "sigma", MultiIndex(Var::x)).pow(2));
  EXPECT_EQ(P("(a+b)^2 - a^2 - 2*a*b"), P("b^2"));
  EXPECT_EQ(P("(a^2-b^2)/(a-b)"), P("a+b"));
  EXPECT_EQ(P("1/(a+b) + 1/(a-b)"), P("2*a/(a^2-b^2)"));
}

TEST(Symexpr, HalfPowers) {
  Expr e = P("u_x^(-1/2)");
  EXPECT_EQ(e * e, P("1/u_x"));
  EXPECT_EQ(P("u_x^(3/2)") * P("u_x^(-3/2)"), Expr(1));
  EXPECT_EQ(P("sqrt(4*u_x^2)"), P("2*u_x"));
  EXPECT_EQ(P("sqrt(8)"), P("2*sqrt(2)"));
  Expr k = P("u_xx/(1+u_x^2)^(3/2)");
  EXPECT_NEAR(eval_num(k, {{Symbol(SymbolKind::Jet, "u", MultiIndex(Var::x)), 1.0},
                           {Symbol(SymbolKind::Jet, "u", MultiIndex(Var::x, 2)), 2.0}}),
              2.0 / std::pow(2.0, 1.5), 1e-14);
  EXPECT_EQ(P("1/(1+sqrt(u))"), P("(1-sqrt(u))/(1-u)"));
}

TEST(Symexpr, Diff) {
  Symbol ux(SymbolKind::Jet, "u", MultiIndex(Var::x));
  Expr k = P("u_xx/(1+u_x^2)^(3/2)");
  Expr dk = diff(k, ux);
  Expr claimed = P("-3*u_xx*u_x*(1+u_x^2)^(-5/2)");
  EXPECT_EQ(dk, claimed);
}

TEST(Symexpr, ZeroTest) {
  EXPECT_TRUE(is_zero(P("sin(theta)^2 + cos(theta)^2 - 1")));
  auto v = zero_test(P("sin(theta)^2 + cos(theta)^2 - 1"));
  EXPECT_TRUE(v.probabilistic);
  EXPECT_FALSE(is_zero(P("sin(theta)^2 + cos(theta)^2")));
}

TEST(Symexpr, Text) {
  EXPECT_EQ(P("u_xx/(1+u_x^2)").str(), "u_xx/(u_x^2 + 1)");
  Expr e = P("3/2*sigma_x^2 - a*b/(c+d)");
  EXPECT_EQ(P(e.str()), e);
}
