#include <gtest/gtest.h>

#include <random>

#include "mframe/liegroup.hpp"
#include "mframe/numeric.hpp"

using namespace mframe;
using namespace mframe::symexpr;
using liegroup::Matrix;

namespace {

const liegroup::GroupActionSpec& entry(const std::string& n) { return liegroup::catalog(n); }

Expr P(const liegroup::GroupActionSpec& s, const std::string& t) { return s.parse(t); }

Symbol jet(const liegroup::GroupActionSpec& s, const std::string& t) { return s.registry.resolve(t); }

bool matrix_zero(const Matrix& m) {
  for (const auto& row : m)
    for (const auto& e : row)
      if (!zero_test(e).zero) return false;
  return true;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] = a[i][j] - b[i][j];
  return out;
}

std::map<std::string, Expr> h_params(const liegroup::GroupActionSpec& s) {
  std::map<std::string, Expr> out;
  for (const auto& p : s.parameters) out[p] = Expr(s.param2(p));
  return out;
}

}  // namespace

TEST(Catalog, ListsAllEntries) {
  auto names = liegroup::catalog_names();
  std::vector<std::string> expect = {"se2-curve", "sl2-action1", "sl2-action2", "sl2-action3", "sl2-surface"};
  EXPECT_EQ(names, expect);
}

TEST(Catalog, Actions) {
  const auto& a1 = entry("sl2-action1");
  EXPECT_EQ(a1.action.at(jet(a1, "u")), P(a1, "(a*u + b)/(c*u + (1 + b*c)/a)"));
  const auto& a3 = entry("sl2-action3");
  Expr cxd = P(a3, "c*x + (1 + b*c)/a");
  EXPECT_EQ(a3.action.at(jet(a3, "u")), Expr(6) * P(a3, "c") * cxd + cxd * cxd * P(a3, "u"));
  const auto& se2 = entry("se2-curve");
  Bindings id;
  for (const auto& [k, v] : se2.identity) id[se2.param(k)] = Expr(v);
  EXPECT_EQ(subst(se2.action.at(jet(se2, "x")), id), P(se2, "x"));
  EXPECT_EQ(subst(se2.action.at(jet(se2, "u")), id), P(se2, "u"));
}

TEST(Catalog, UnknownEntry) {
  EXPECT_THROW(liegroup::catalog("nosuch"), liegroup::CatalogError);
  EXPECT_THROW(liegroup::catalog("../catalog/sl2-action1"), liegroup::CatalogError);
}

TEST(Catalog, ValidationRejectsBrokenSpec) {
  auto spec = entry("sl2-action1");
  spec.infinitesimals[0].coeff[jet(spec, "u")] = P(spec, "3*u");
  EXPECT_THROW(liegroup::validate(spec), liegroup::CatalogError);
  auto spec2 = entry("sl2-action1");
  spec2.inverse["b"] = P(spec2, "b");
  EXPECT_THROW(liegroup::validate(spec2), liegroup::CatalogError);
}

TEST(InfinitesimalMatrix, ProjectiveAction) {
  const auto& s = entry("sl2-action1");
  Matrix m = liegroup::infinitesimal_matrix(s, {jet(s, "u"), jet(s, "u_x")});
  Matrix expect = {{P(s, "2*u"), P(s, "2*u_x")}, {Expr(1), Expr(0)}, {P(s, "-u^2"), P(s, "-2*u*u_x")}};
  EXPECT_EQ(m, expect);
  Matrix mx = liegroup::infinitesimal_matrix(s, {jetcalc::independent_symbol(Var::x)});
  for (const auto& row : mx) EXPECT_TRUE(row[0].is_zero());
}

TEST(Adjoint, ProjectiveActionMatchesClosedForm) {
  const auto& s = entry("sl2-action1");
  Matrix ad = liegroup::adjoint_matrix(s);
  Matrix expect_t = {{P(s, "a*d + b*c"), P(s, "c*d"), P(s, "-a*b")},
                     {P(s, "2*b*d"), P(s, "d^2"), P(s, "-b^2")},
                     {P(s, "-2*a*c"), P(s, "-c^2"), P(s, "a^2")}};
  Bindings d{{s.param("d"), s.derived.at("d")}};
  expect_t = liegroup::map(expect_t, [&](const Expr& e) { return subst(e, d); });
  EXPECT_EQ(liegroup::transpose(ad), expect_t);
}

TEST(Adjoint, IdentityAndRepresentation) {
  for (const auto& name : liegroup::catalog_names()) {
    const auto& s = entry(name);
    Matrix ad = liegroup::adjoint_matrix(s);
    std::map<std::string, Expr> id;
    for (const auto& [k, v] : s.identity) id[k] = Expr(v);
    Matrix at_id = liegroup::adjoint_at(s, ad, id);
    for (std::size_t i = 0; i < s.dim(); ++i)
      for (std::size_t j = 0; j < s.dim(); ++j) EXPECT_EQ(at_id[i][j], Expr(i == j ? 1 : 0)) << name;
    Matrix adh = liegroup::adjoint_at(s, ad, h_params(s));
    Matrix adgh = liegroup::adjoint_at(s, ad, s.product);
    EXPECT_TRUE(matrix_zero(sub(liegroup::multiply(ad, adh), adgh))) << name;
  }
}

TEST(Adjoint, KillingFormInvariance) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-0.6, 0.6);
  for (const auto& name : liegroup::catalog_names()) {
    const auto& s = entry(name);
    if (!s.semisimple) continue;
    Matrix ad = liegroup::adjoint_matrix(s);
    Matrix B = liegroup::to_matrix(liegroup::killing_form(s));
    Matrix lhs = liegroup::multiply(liegroup::multiply(ad, B), liegroup::transpose(ad));
    EXPECT_TRUE(matrix_zero(sub(lhs, B))) << name;
    for (int k = 0; k < 100; ++k) {
      Point pt;
      for (const auto& p : s.parameters) pt[s.param(p)] = s.identity.at(p).get_d() + U(rng);
      for (std::size_t i = 0; i < s.dim(); ++i)
        for (std::size_t j = 0; j < s.dim(); ++j)
          EXPECT_NEAR(eval_num(lhs[i][j], pt), B[i][j].constant_value().get_d(), 1e-9);
    }
  }
}

TEST(Killing, ProjectiveAction) {
  const auto& s = entry("sl2-action1");
  liegroup::RationalMatrix expect = {{8, 0, 0}, {0, 0, 4}, {0, 4, 0}};
  EXPECT_EQ(liegroup::killing_form(s), expect);
  Expr al = P(s, "a"), be = P(s, "b"), ga = P(s, "c");
  Matrix adv = liegroup::ad_matrix(s, {al, be, ga});
  Matrix e = {{Expr(0), Expr(2) * be, Expr(-2) * ga}, {ga, Expr(-2) * al, Expr(0)}, {-be, Expr(0), Expr(2) * al}};
  EXPECT_EQ(adv, e);
}

TEST(Killing, SymmetricAndSemisimplicity) {
  for (const auto& name : liegroup::catalog_names()) {
    const auto& s = entry(name);
    auto B = liegroup::killing_form(s);
    for (std::size_t i = 0; i < B.size(); ++i)
      for (std::size_t j = 0; j < B.size(); ++j) EXPECT_EQ(B[i][j], B[j][i]) << name;
    EXPECT_EQ(liegroup::inverse(B).has_value(), s.semisimple) << name;
  }
}

TEST(Bracket, Examples) {
  const auto& s = entry("sl2-action1");
  const auto& v = s.infinitesimals;
  Symbol u = jet(s, "u");
  EXPECT_EQ(liegroup::bracket(v[1], v[0]).at(u), Expr(2));
  EXPECT_TRUE(liegroup::bracket(v[2], v[2]).coeff.empty());
  // oracle: 2u * d(-u^2)/du - (-u^2) * d(2u)/du
  EXPECT_EQ(liegroup::bracket(v[0], v[2]).at(u), P(s, "-2*u^2"));
}

TEST(Bracket, JacobiIdentity) {
  for (const auto& name : liegroup::catalog_names()) {
    const auto& s = entry(name);
    const auto& v = s.infinitesimals;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j)
        for (std::size_t k = 0; k < v.size(); ++k) {
          auto a = liegroup::bracket(v[i], liegroup::bracket(v[j], v[k]));
          auto b = liegroup::bracket(v[j], liegroup::bracket(v[k], v[i]));
          auto c = liegroup::bracket(v[k], liegroup::bracket(v[i], v[j]));
          std::set<Symbol> keys;
          for (const auto* f : {&a, &b, &c})
            for (const auto& [sym, e] : f->coeff) keys.insert(sym);
          for (const auto& sym : keys) EXPECT_TRUE((a.at(sym) + b.at(sym) + c.at(sym)).is_zero()) << name;
        }
  }
}
