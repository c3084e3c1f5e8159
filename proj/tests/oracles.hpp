#pragma once

// Independent reference computations in jet coordinates.

#include <vector>

#include "mframe/varcalc.hpp"

namespace mframe::oracle {

using symexpr::Bindings;
using symexpr::Expr;
using symexpr::MultiIndex;
using symexpr::Symbol;
using symexpr::SymbolKind;
using symexpr::Var;

// Noether current of a first-order-in-s symmetry with s invariant:
// J = sum_w sum_k sum_{i<k} (-D)^i(dL/dw_k) D^{k-1-i} Q_w, with D J = -sum_w Q_w E_w(L).
inline Expr noether_current(const Expr& lag, const jetcalc::JetSpace& js, const std::vector<Symbol>& deps,
                            const std::vector<Expr>& characteristic) {
  const Var s = js.independent.front();
  Expr j;
  for (std::size_t w = 0; w < deps.size(); ++w) {
    int n = symexpr::max_order(lag, deps[w].kind, deps[w].name);
    for (int k = 1; k <= n; ++k) {
      Expr a = symexpr::diff(lag, deps[w].with_deriv(MultiIndex(s, k)));
      for (int i = 0; i < k; ++i) {
        Expr q = characteristic[w];
        for (int m = 0; m < k - 1 - i; ++m) q = jetcalc::total_derivative(q, s, js);
        j += a * q;
        a = -jetcalc::total_derivative(a, s, js);
      }
    }
  }
  return j;
}

// Classical currents of every basis field for a curve entry, Lagrangian in jets.
inline std::vector<Expr> classical_currents(const liegroup::GroupActionSpec& spec, const Expr& lag,
                                            const jetcalc::JetSpace& js) {
  std::vector<Symbol> deps;
  for (std::size_t a = 0; a < spec.dependent.size(); ++a) deps.push_back(spec.dependent_symbol(a));
  std::vector<Expr> out;
  for (const auto& v : spec.infinitesimals) {
    std::vector<Expr> q;
    for (const auto& d : deps) q.push_back(v.at(d));
    out.push_back(noether_current(lag, js, deps, q));
  }
  return out;
}

// Arc-length curves: x_s = cos p, u_s = sin p.
inline Bindings unit_tangent(const jetcalc::JetSpace& pjs, int order) {
  const Var s = pjs.independent.front();
  Expr p(Symbol(SymbolKind::Jet, "p"));
  Expr cx = symexpr::cos(p), su = symexpr::sin(p);
  Bindings b;
  for (int k = 1; k <= order; ++k) {
    b[Symbol(SymbolKind::Jet, "x", MultiIndex(s, k))] = cx;
    b[Symbol(SymbolKind::Jet, "u", MultiIndex(s, k))] = su;
    cx = jetcalc::total_derivative(cx, s, pjs);
    su = jetcalc::total_derivative(su, s, pjs);
  }
  return b;
}

// x_s = u and its derivatives.
inline Bindings tangent_equals_u(Var s, int order) {
  Bindings b;
  for (int k = 1; k <= order; ++k)
    b[Symbol(SymbolKind::Jet, "x", MultiIndex(s, k))] =
        Expr(Symbol(SymbolKind::Jet, "u", k > 1 ? MultiIndex(s, k - 1) : MultiIndex()));
  return b;
}

}  // namespace mframe::oracle
