#include "mframe/jetcalc.hpp"

#include <algorithm>

namespace mframe::jetcalc {

using symexpr::derivation;
using symexpr::diff;

Symbol independent_symbol(Var v) { return Symbol(SymbolKind::Independent, symexpr::var_name(v)); }

bool JetSpace::is_dependent(const Symbol& s) const {
  for (const auto& d : dependent)
    if (d.kind == s.kind && d.name == s.name) return true;
  return false;
}

Symbol JetSpace::independent_symbol(Var v) const { return jetcalc::independent_symbol(v); }

Symbol JetSpace::coordinate(std::size_t alpha, const MultiIndex& k) const {
  return Symbol(dependent.at(alpha).kind, dependent.at(alpha).name, k);
}

std::vector<MultiIndex> JetSpace::multi_indices_of_order(int n) const {
  std::vector<MultiIndex> out;
  if (n == 0) return {MultiIndex()};
  // distribute n among the active variables
  std::vector<MultiIndex> cur{MultiIndex()};
  for (int step = 0; step < n; ++step) {
    std::vector<MultiIndex> next;
    for (const auto& m : cur)
      for (auto v : independent) next.push_back(m.plus(v));
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    cur = std::move(next);
  }
  std::sort(cur.begin(), cur.end(), [](const MultiIndex& a, const MultiIndex& b) { return a > b; });
  return cur;
}

std::vector<MultiIndex> JetSpace::multi_indices(int n) const {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= n; ++k) {
    auto m = multi_indices_of_order(k);
    out.insert(out.end(), m.begin(), m.end());
  }
  return out;
}

Expr total_derivative(const Expr& e, Var i, const JetSpace& js) {
  const std::string iname = symexpr::var_name(i);
  return derivation(e, [&](const Symbol& s) -> Expr {
    if (s.kind == SymbolKind::Independent) return s.name == iname ? Expr(1) : Expr();
    if (js.is_dependent(s)) {
      MultiIndex k = s.deriv.plus(i);
      if (k.order() > js.order)
        throw TruncationExceeded("total derivative of " + s.text() + " exceeds jet order " +
                                 std::to_string(js.order));
      return Expr(s.with_deriv(k));
    }
    return Expr();
  });
}

Expr total_derivative(const Expr& e, const MultiIndex& k, const JetSpace& js) {
  Expr r = e;
  for (auto v : k.sequence()) {
    if (r.is_zero()) break;
    r = total_derivative(r, v, js);
  }
  return r;
}

Expr VectorField::at(const Symbol& s) const {
  auto it = coeff.find(s);
  return it == coeff.end() ? Expr() : it->second;
}

bool VectorField::operator==(const VectorField& o) const {
  std::set<Symbol> keys;
  for (const auto& [k, v] : coeff) keys.insert(k);
  for (const auto& [k, v] : o.coeff) keys.insert(k);
  for (const auto& k : keys)
    if (at(k) != o.at(k)) return false;
  return true;
}

VectorField prolong_vector_field(const VectorField& v, int order, const JetSpace& js0) {
  JetSpace js = js0;
  js.order = std::max(js.order, order + 1);
  VectorField out;
  for (auto i : js.independent) {
    Symbol xi = independent_symbol(i);
    Expr c = v.at(xi);
    if (!c.is_zero()) out.coeff[xi] = c;
  }
  for (std::size_t a = 0; a < js.dependent.size(); ++a) {
    Symbol u = js.coordinate(a, {});
    // characteristic Q = phi - sum xi^i u_i
    Expr q = v.at(u);
    for (auto i : js.independent) {
      Expr xi = v.at(independent_symbol(i));
      if (!xi.is_zero()) q -= xi * Expr(js.coordinate(a, MultiIndex(i)));
    }
    std::map<MultiIndex, Expr> dq;
    dq[MultiIndex()] = q;
    for (const auto& k : js.multi_indices(order)) {
      if (!k.empty()) {
        Var first = k.sequence().back();
        for (auto w : js.independent)
          if (k.count(w) > 0) {
            first = w;
            break;
          }
        dq[k] = total_derivative(dq.at(*k.minus(first)), first, js);
      }
      Expr c = dq[k];
      for (auto i : js.independent) {
        Expr xi = v.at(independent_symbol(i));
        if (!xi.is_zero()) c += xi * Expr(js.coordinate(a, k.plus(i)));
      }
      if (!c.is_zero()) out.coeff[js.coordinate(a, k)] = c;
    }
  }
  return out;
}

Expr apply_vector_field(const VectorField& v, const Expr& f) {
  Expr r;
  for (const auto& [s, c] : v.coeff) {
    if (c.is_zero() || !f.depends_on(s)) continue;
    r += c * diff(f, s);
  }
  return r;
}

namespace {

std::vector<std::vector<Expr>> invert(std::vector<std::vector<Expr>> m) {
  std::size_t n = m.size();
  std::vector<std::vector<Expr>> inv(n, std::vector<Expr>(n));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = Expr(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m[p][c].is_zero()) ++p;
    if (p == n) throw DegenerateJacobian("non-invertible Jacobian of the transformed independent variables");
    std::swap(m[p], m[c]);
    std::swap(inv[p], inv[c]);
    Expr piv = m[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      m[c][j] /= piv;
      inv[c][j] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c].is_zero()) continue;
      Expr f = m[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        m[r][j] -= f * m[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

}  // namespace

std::map<Symbol, Expr> prolong_action(const std::map<Symbol, Expr>& base, int order, const JetSpace& js0) {
  JetSpace js = js0;
  js.order = std::max(js.order, order + 1);
  std::size_t p = js.independent.size();
  std::map<Symbol, Expr> out;
  std::vector<Expr> xt;
  bool fixes = true;
  for (auto i : js.independent) {
    Symbol xi = independent_symbol(i);
    auto it = base.find(xi);
    Expr v = it == base.end() ? Expr(xi) : it->second;
    if (v != Expr(xi)) fixes = false;
    xt.push_back(v);
    out[xi] = v;
  }
  std::vector<std::vector<Expr>> jinv;
  if (!fixes) {
    std::vector<std::vector<Expr>> jac(p, std::vector<Expr>(p));
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) jac[a][b] = total_derivative(xt[a], js.independent[b], js);
    jinv = invert(jac);
  }
  auto dtilde = [&](const Expr& f, std::size_t i) {
    if (fixes) return total_derivative(f, js.independent[i], js);
    Expr r;
    for (std::size_t j = 0; j < p; ++j)
      if (!jinv[j][i].is_zero()) r += jinv[j][i] * total_derivative(f, js.independent[j], js);
    return r;
  };
  for (std::size_t a = 0; a < js.dependent.size(); ++a) {
    Symbol u = js.coordinate(a, {});
    auto it = base.find(u);
    out[u] = it == base.end() ? Expr(u) : it->second;
    for (const auto& k : js.multi_indices(order)) {
      if (k.empty()) continue;
      std::size_t idx = 0;
      while (k.count(js.independent[idx]) == 0) ++idx;
      MultiIndex parent = *k.minus(js.independent[idx]);
      out[js.coordinate(a, k)] = dtilde(out.at(js.coordinate(a, parent)), idx);
    }
  }
  return out;
}

Expr euler_operator(const Expr& L, const DependentVar& dep, const JetSpace& js) {
  Expr r;
  std::vector<Symbol> present;
  for (const auto& s : L.free_symbols())
    if (s.kind == dep.kind && s.name == dep.name) present.push_back(s);
  for (const auto& s : present) {
    Expr d = total_derivative(diff(L, s), s.deriv, js);
    r += (s.deriv.order() % 2) ? -d : d;
  }
  return r;
}

long multi_binomial(const MultiIndex& j, const MultiIndex& k) {
  long r = 1;
  for (int v = 0; v < symexpr::kNumVars; ++v) {
    int n = j.count(static_cast<Var>(v)), m = k.count(static_cast<Var>(v));
    if (m > n) return 0;
    long b = 1;
    for (int i = 1; i <= m; ++i) b = b * (n - m + i) / i;
    r *= b;
  }
  return r;
}

}  // namespace mframe::jetcalc
