#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mframe/jetcalc.hpp"
#include "mframe/liegroup.hpp"
#include "mframe/numeric.hpp"
#include "mframe/parse.hpp"

using namespace mframe;
using namespace mframe::symexpr;
using jetcalc::JetSpace;
using jetcalc::LinDiffOp;

namespace {

SymbolRegistry registry() {
  SymbolRegistry r;
  r.add(SymbolKind::Independent, "x");
  r.add(SymbolKind::Independent, "t");
  r.add(SymbolKind::Jet, "u", true);
  r.add(SymbolKind::Jet, "w", true);
  r.add(SymbolKind::Generator, "sigma", true);
  r.add(SymbolKind::Generator, "kappa", true);
  for (auto n : {"a", "b", "c", "d"}) r.add(SymbolKind::Parameter, n);
  return r;
}

Expr P(const std::string& s) {
  static SymbolRegistry r = registry();
  return parse(s, r);
}

JetSpace jx(int n = 8) { return JetSpace({Var::x}, {{SymbolKind::Jet, "u"}}, n); }
JetSpace jxt(int n = 8) { return JetSpace({Var::x, Var::t}, {{SymbolKind::Jet, "u"}, {SymbolKind::Jet, "w"}}, n); }
JetSpace gx(int n = 10) { return JetSpace({Var::x}, {{SymbolKind::Generator, "sigma"}}, n); }
JetSpace gxt(int n = 10) {
  return JetSpace({Var::x, Var::t}, {{SymbolKind::Generator, "sigma"}, {SymbolKind::Generator, "kappa"}}, n);
}

Symbol U(const std::string& suf = "") { return Symbol(SymbolKind::Jet, "u", MultiIndex::from_suffix(suf)); }

const char* kSchwarzian = "u_xxx/u_x - 3/2*u_xx^2/u_x^2";

}  // namespace

TEST(TotalDerivative, Basics) {
  EXPECT_EQ(jetcalc::total_derivative(P("u"), Var::x, jx()), P("u_x"));
  EXPECT_EQ(jetcalc::total_derivative(P("x"), Var::x, jx()), Expr(1));
  EXPECT_EQ(jetcalc::total_derivative(P("x*u^2"), Var::x, jx()), P("u^2 + 2*x*u*u_x"));
  EXPECT_THROW(jetcalc::total_derivative(P("u_xx"), Var::x, jx(2)), jetcalc::TruncationExceeded);
}

TEST(TotalDerivative, SchwarzianAgainstFiniteDifferences) {
  Expr s = P(kSchwarzian);
  Expr ds = jetcalc::total_derivative(s, Var::x, jx());
  EXPECT_EQ(ds, P("u_xxxx/u_x - 4*u_xx*u_xxx/u_x^2 + 3*u_xx^3/u_x^3"));
  // along u(x) = sin x + 2x
  auto jets = [](double x) {
    return Point{{U(), std::sin(x) + 2 * x}, {U("x"), std::cos(x) + 2}, {U("xx"), -std::sin(x)},
                 {U("xxx"), -std::cos(x)}, {U("xxxx"), std::sin(x)}};
  };
  const double h = 1e-5;
  for (double x0 : {0.1, 0.7, 1.3, 2.9, -0.4}) {
    double fd = (eval_num(s, jets(x0 + h)) - eval_num(s, jets(x0 - h))) / (2 * h);
    EXPECT_NEAR(eval_num(ds, jets(x0)), fd, 1e-6 * std::max(1.0, std::fabs(fd)));
  }
}

TEST(TotalDerivative, Commute) {
  std::vector<std::string> samples = {"u_x*w_t/(1+u^2)", "x*t*u_xt^2 + w", "sqrt(1+u_x^2)*w_xx", "u/(w+x)"};
  for (const auto& s : samples) {
    Expr e = P(s);
    Expr a = jetcalc::total_derivative(jetcalc::total_derivative(e, Var::x, jxt()), Var::t, jxt());
    Expr b = jetcalc::total_derivative(jetcalc::total_derivative(e, Var::t, jxt()), Var::x, jxt());
    EXPECT_TRUE(is_zero(a - b)) << s;
  }
}

TEST(ProlongAction, ProjectiveAction) {
  std::map<Symbol, Expr> base{{U(), P("(a*u+b)/(c*u+d)")}};
  Bindings det{{Symbol(SymbolKind::Parameter, "a"), P("(1 + b*c)/d")}};
  auto pr = jetcalc::prolong_action(base, 3, jx());
  EXPECT_TRUE(is_zero(subst(pr.at(U("x")) - P("u_x/(c*u+d)^2"), det)));
  EXPECT_TRUE(is_zero(subst(pr.at(U("xx")) - P("(u_xx*(c*u+d) - 2*c*u_x^2)/(c*u+d)^3"), det)));
  Bindings id{{Symbol(SymbolKind::Parameter, "a"), Expr(1)},
              {Symbol(SymbolKind::Parameter, "b"), Expr(0)},
              {Symbol(SymbolKind::Parameter, "c"), Expr(0)},
              {Symbol(SymbolKind::Parameter, "d"), Expr(1)}};
  for (const auto& [k, v] : pr) EXPECT_EQ(subst(v, id), Expr(k)) << k.text();
}

TEST(ProlongAction, NonFixedIndependentsUseChainRule) {
  // translation and scaling of x: u_x transforms by 1/a
  std::map<Symbol, Expr> base{{jetcalc::independent_symbol(Var::x), P("a*x + b")}, {U(), P("u")}};
  auto pr = jetcalc::prolong_action(base, 2, jx());
  EXPECT_EQ(pr.at(U("x")), P("u_x/a"));
  EXPECT_EQ(pr.at(U("xx")), P("u_xx/a^2"));
}

TEST(ProlongAction, GroupPropertyForCatalog) {
  for (const auto& name : liegroup::catalog_names()) {
    const auto& spec = liegroup::catalog(name);
    auto pr = liegroup::prolonged_action(spec, 3);
    Bindings gh, to_h;
    for (const auto& p : spec.parameters) {
      gh[spec.param(p)] = spec.product.at(p);
      to_h[spec.param(p)] = Expr(spec.param2(p));
    }
    Bindings h_of_z;
    for (const auto& [k, v] : pr) h_of_z[k] = subst(v, to_h);
    for (const auto& [k, v] : pr) {
      if (k.deriv.order() > 3) continue;
      auto z = zero_test(subst(v, h_of_z) - subst(v, gh));
      EXPECT_TRUE(z.zero) << name << " " << k.text();
    }
  }
}

TEST(ProlongVectorField, ProjectiveBasis) {
  jetcalc::VectorField v3{{{U(), P("-u^2")}}};
  auto p3 = jetcalc::prolong_vector_field(v3, 3, jx());
  EXPECT_EQ(p3.at(U("x")), P("-2*u*u_x"));
  EXPECT_EQ(p3.at(U("xx")), P("-(2*u_x^2 + 2*u*u_xx)"));
  jetcalc::VectorField v2{{{U(), Expr(1)}}};
  EXPECT_TRUE(jetcalc::prolong_vector_field(v2, 3, jx()).at(U("x")).is_zero());
  jetcalc::VectorField v1{{{U(), P("2*u")}}};
  EXPECT_EQ(jetcalc::prolong_vector_field(v1, 3, jx()).at(U("x")), P("2*u_x"));
}

TEST(ProlongVectorField, MatchesTangentOfProlongedAction) {
  const auto& spec = liegroup::catalog("sl2-action1");
  auto pr = liegroup::prolonged_action(spec, 3);
  Bindings id;
  for (const auto& [k, v] : spec.identity) id[spec.param(k)] = Expr(v);
  for (std::size_t j = 0; j < spec.dim(); ++j) {
    auto pv = jetcalc::prolong_vector_field(spec.infinitesimals[j], 3, spec.jet_space());
    for (const auto& [k, v] : pr) {
      if (k.kind != SymbolKind::Jet) continue;
      Expr tangent = subst(diff(v, spec.param(spec.parameters[j])), id);
      EXPECT_EQ(tangent, pv.at(k)) << j << " " << k.text();
    }
  }
}

TEST(EulerOperator, Examples) {
  EXPECT_EQ(jetcalc::euler_operator(P("sigma_x^2/2"), {SymbolKind::Generator, "sigma"}, gx()), P("-sigma_xx"));
  EXPECT_EQ(jetcalc::euler_operator(P("kappa^2"), {SymbolKind::Generator, "kappa"}, gxt()), P("2*kappa"));
}

TEST(EulerOperator, AnnihilatesTotalDerivatives) {
  std::vector<std::string> samples = {"u*u_x^2", "x*u_xx/(1+u^2)", "sqrt(u_x)*w - t*w_t", "u_xt*w^3"};
  for (const auto& s : samples)
    for (auto v : {Var::x, Var::t}) {
      Expr d = jetcalc::total_derivative(P(s), v, jxt());
      for (const char* dep : {"u", "w"})
        EXPECT_TRUE(is_zero(jetcalc::euler_operator(d, {SymbolKind::Jet, dep}, jxt()))) << s << " " << dep;
    }
}

TEST(EulerOperator, SchwarzianLagrangianInJets) {
  // E^u(1/2 (D_x S)^2) equals -(D^3 + 2 S D + S_x)(-S_xx) written in jets
  JetSpace js = jx(12);
  Expr S = P(kSchwarzian);
  Expr Sx = jetcalc::total_derivative(S, Var::x, js);
  Expr L = Sx * Sx / Expr(2);
  Expr direct = jetcalc::euler_operator(L, {SymbolKind::Jet, "u"}, js);
  Expr f = -jetcalc::total_derivative(S, MultiIndex(Var::x, 2), js);
  Expr hf = jetcalc::total_derivative(f, MultiIndex(Var::x, 3), js) +
            Expr(2) * S * jetcalc::total_derivative(f, Var::x, js) + Sx * f;
  // I^u_tau = u_tau/u_x, so the jet Euler operator is the invariant one divided by u_x
  EXPECT_TRUE(is_zero(direct * P("u_x") + hf));
}

TEST(LinDiffOp, AdjointExamples) {
  JetSpace gs = gx();
  LinDiffOp H = LinDiffOp::derivative(MultiIndex(Var::x, 3)) + LinDiffOp::derivative(MultiIndex(Var::x), P("2*sigma")) +
                LinDiffOp::scalar(P("sigma_x"));
  EXPECT_EQ(H.adjoint(gs), -H);
  JetSpace gt = gxt();
  LinDiffOp H2 = LinDiffOp::derivative(MultiIndex(Var::t)) - LinDiffOp::derivative(MultiIndex(Var::x), P("kappa")) +
                 LinDiffOp::scalar(P("kappa_x"));
  LinDiffOp expect = -LinDiffOp::derivative(MultiIndex(Var::t)) + LinDiffOp::derivative(MultiIndex(Var::x), P("kappa")) +
                     LinDiffOp::scalar(P("2*kappa_x"));
  EXPECT_EQ(H2.adjoint(gt), expect);
  EXPECT_EQ(LinDiffOp::identity().adjoint(gs), LinDiffOp::identity());
  EXPECT_EQ(H.str(), "D_x^3 + 2*sigma*D_x + sigma_x");
}

TEST(LinDiffOp, AdjointIsInvolution) {
  std::mt19937_64 rng(7);
  std::vector<std::string> coeffs = {"sigma", "sigma_x", "kappa^2", "1", "-3/2", "sigma*kappa_t", "kappa_xx + sigma"};
  JetSpace gs = gxt(16);
  for (int it = 0; it < 100; ++it) {
    LinDiffOp op;
    int terms = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < terms; ++k) {
      int nx = static_cast<int>(rng() % 3), nt = static_cast<int>(rng() % 2);
      if (nx + nt > 4) continue;
      MultiIndex j = MultiIndex(Var::x, nx) + MultiIndex(Var::t, nt);
      op.add(j, P(coeffs[rng() % coeffs.size()]));
    }
    EXPECT_EQ(op.adjoint(gs).adjoint(gs), op);
  }
}

TEST(LinDiffOp, AdjointPairing) {
  // f L(g) - L*(f) g is a total derivative: its Euler operator vanishes
  LinDiffOp H = LinDiffOp::derivative(MultiIndex(Var::x, 2), P("sigma")) + LinDiffOp::scalar(P("sigma_x^2"));
  Expr f = P("kappa"), g = P("kappa_x*sigma");
  JetSpace js({Var::x}, {{SymbolKind::Generator, "sigma"}, {SymbolKind::Generator, "kappa"}}, 14);
  Expr w = f * H.apply(g, js) - H.adjoint(js).apply(f, js) * g;
  EXPECT_TRUE(jetcalc::euler_operator(w, {SymbolKind::Generator, "kappa"}, js).is_zero());
  EXPECT_TRUE(jetcalc::euler_operator(w, {SymbolKind::Generator, "sigma"}, js).is_zero());
}
