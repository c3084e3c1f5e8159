#include "mframe/varcalc.hpp"

#include <algorithm>
#include <mutex>
#include <random>

#include "mframe/parse.hpp"

namespace mframe::varcalc {

using jetcalc::DependentVar;
using jetcalc::total_derivative;
using symexpr::Bindings;
using symexpr::Rational;

namespace {

std::size_t dependent_index(const GroupActionSpec& s, const std::string& name) {
  auto it = std::find(s.dependent.begin(), s.dependent.end(), name);
  return static_cast<std::size_t>(it - s.dependent.begin());
}

Var first_var(const MultiIndex& k) { return k.sequence().front(); }

// A * D_K(W) = bulk * W + sum_v D_v(P_v); returns bulk.
Expr integrate_by_parts(Expr a, MultiIndex k, const Expr& w, const JetSpace& js, std::map<Var, Expr>& p) {
  while (!k.empty()) {
    Var v = first_var(k);
    k = *k.minus(v);
    p[v] += a * total_derivative(w, k, js);
    a = -total_derivative(a, v, js);
  }
  return a;
}

bool mentions(const Expr& e, const Symbol& base) {
  for (const auto& s : e.free_symbols())
    if (s.kind == base.kind && s.name == base.name) return true;
  return false;
}

Expr simplify(const Context& ctx, const Expr& e) { return ctx.table->reduce(e); }

Expr matrix_apply_row(const Matrix& m, std::size_t k, const std::vector<Expr>& v) {
  Expr r;
  for (std::size_t l = 0; l < v.size(); ++l)
    if (!m[k][l].is_zero() && !v[l].is_zero()) r += m[k][l] * v[l];
  return r;
}

// Positive scaling making the constant side primitive over the integers.
void normalize(Equation& eq) {
  if (eq.rhs.is_zero() || !eq.rhs.is_polynomial()) return;
  Expr f = Expr(eq.rhs.den().constant_value() / eq.rhs.num().content());
  eq.lhs *= f;
  eq.rhs *= f;
}

Matrix killing_inverse(const GroupActionSpec& spec) {
  auto binv = liegroup::inverse(liegroup::killing_form(spec));
  if (!spec.semisimple || !binv) throw SingularKillingForm(spec.name + ": the Killing form is degenerate");
  return liegroup::to_matrix(*binv);
}

}  // namespace

// ---- context ----

Context make_context(const GroupActionSpec& spec, int table_order) {
  Context c;
  c.spec = &spec;
  c.frame = frame::solve_frame(spec);
  c.table = std::make_shared<const InvariantTable>(c.frame, table_order < 0 ? 6 : table_order, true);
  c.syzygies = frame::syzygy_operators(*c.table);
  return c;
}

const Context& context(const GroupActionSpec& spec) {
  static std::mutex mu;
  static std::map<const GroupActionSpec*, std::unique_ptr<Context>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[&spec];
  if (!slot) slot = std::make_unique<Context>(make_context(spec));
  return *slot;
}

// ---- Lagrangians ----

Expr InvariantLagrangian::full() const {
  if (!multiplier) return L;
  return L + Expr(sign) * Expr(*multiplier) * constraint;
}

InvariantLagrangian make_lagrangian(const Context& ctx, const Expr& L, bool constrained) {
  const auto& s = *ctx.spec;
  for (const auto& sym : L.free_symbols()) {
    bool known = sym.kind == SymbolKind::Generator &&
                 std::any_of(s.generators.begin(), s.generators.end(), [&](const auto& g) { return g.name == sym.name; });
    if (!known) throw LagrangianError("Lagrangian symbol " + sym.text() + " is not a generating invariant of " + s.name);
    for (Var v : sym.deriv.sequence())
      if (std::find(s.independent.begin(), s.independent.end(), v) == s.independent.end())
        throw LagrangianError("Lagrangian symbol " + sym.text() + " differentiates in " + symexpr::var_name(v) +
                              ", which is not an independent variable of " + s.name);
    for (Var v : s.independent)
      if (sym.deriv.count(v) > kMaxLagrangianOrder)
        throw LagrangianError("Lagrangian order exceeds " + std::to_string(kMaxLagrangianOrder) + " in " + sym.text());
  }
  InvariantLagrangian out;
  out.L = L;
  out.constrained = constrained;
  if (constrained && s.constraint) {
    out.multiplier = Symbol(SymbolKind::Multiplier, s.constraint->multiplier);
    out.constraint = s.constraint->expr;
    out.sign = s.constraint->sign;
  }
  return out;
}

InvariantLagrangian parse_lagrangian(const Context& ctx, const std::string& text, bool constrained) {
  return make_lagrangian(ctx, ctx.spec->parse(text), constrained);
}

Expr random_lagrangian(const Context& ctx, std::uint64_t seed, int order, int terms) {
  const auto& s = *ctx.spec;
  std::vector<Symbol> pool;
  JetSpace base(s.independent, {}, order);
  for (const auto& g : s.generators)
    for (const auto& k : base.multi_indices(order)) pool.emplace_back(SymbolKind::Generator, g.name, k);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> degree(1, 3), coef(-5, 5), den(1, 3);
  Expr L;
  while (L.is_zero())
    for (int i = 0; i < terms; ++i) {
      int c = coef(rng);
      Expr m = Expr(Rational(c == 0 ? 1 : c, den(rng)));
      for (int d = degree(rng); d > 0; --d) m *= Expr(pool[pick(rng)]);
      L += m;
    }
  return L;
}

LinDiffOp adjoint_op(const LinDiffOp& op, const JetSpace& space) { return op.adjoint(space); }

// ---- Euler-Lagrange ----

ELSystem invariant_el(const Context& ctx, const InvariantLagrangian& L) {
  const auto& s = *ctx.spec;
  const auto& F = ctx.space();
  const auto& H = ctx.syzygies;
  Expr full = L.full();
  ELSystem el;
  el.dependents = s.dependent;
  el.multiplier = L.multiplier;
  for (const auto& g : s.generators) {
    el.generators.push_back(g.name);
    el.generator_euler.push_back(jetcalc::euler_operator(full, DependentVar{SymbolKind::Generator, g.name}, F));
  }
  for (std::size_t a = 0; a < s.dependent.size(); ++a) {
    Expr e;
    for (std::size_t j = 0; j < s.generators.size(); ++j)
      e += adjoint_op(H.at(j, a), F).apply(el.generator_euler[j], F);
    el.equations.push_back(simplify(ctx, e));
  }
  for (auto& e : el.generator_euler) e = simplify(ctx, e);
  return el;
}

std::optional<Expr> antiderivative(const Expr& e, const JetSpace& js) {
  if (js.independent.size() != 1) return std::nullopt;
  Var v = js.independent.front();
  Expr q, r = e;
  for (int it = 0; it < 256 && !r.is_zero(); ++it) {
    std::optional<Symbol> top;
    for (const auto& sym : r.free_symbols())
      if (js.is_dependent(sym) && (!top || sym.deriv.order() > top->deriv.order())) top = sym;
    if (!top || top->deriv.empty()) return std::nullopt;
    Symbol low = top->with_deriv(*top->deriv.minus(v));
    try {
      auto cs = symexpr::coefficients(r, *top);
      if (cs.rbegin()->first > 1 || !cs.count(1)) return std::nullopt;
      Expr f;
      for (const auto& [k, c] : symexpr::coefficients(cs.at(1), low))
        f += c * Expr(low).pow(k + 1) / Expr(k + 1);
      q += f;
      r -= total_derivative(f, v, js);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  if (!r.is_zero()) return std::nullopt;
  return q;
}

namespace {

// Solves a constraint linear in one generator symbol.
Bindings constraint_bindings(const Context& ctx, const InvariantLagrangian& L) {
  const auto& F = ctx.space();
  std::optional<Symbol> g;
  for (const auto& sym : L.constraint.free_symbols()) {
    if (sym.kind != SymbolKind::Generator || !sym.deriv.empty() || g)
      throw NonlinearMultiplier("constraint " + L.constraint.str() + " is not solvable for a single generator");
    g = sym;
  }
  if (!g) throw NonlinearMultiplier("constraint " + L.constraint.str() + " involves no generator");
  auto cs = symexpr::coefficients(L.constraint, *g);
  if (cs.rbegin()->first != 1 || !cs.at(1).is_constant())
    throw NonlinearMultiplier("constraint " + L.constraint.str() + " is not linear in " + g->text());
  Expr sol = -(cs.count(0) ? cs.at(0) : Expr()) / cs.at(1);
  Bindings b;
  for (const auto& k : F.multi_indices(F.order)) b[g->with_deriv(k)] = total_derivative(sol, k, F);
  return b;
}

std::optional<Expr> solve_multiplier(const Expr& e0, const Symbol& lam, const JetSpace& F) {
  Expr e = e0;
  for (int depth = 0; depth < 8; ++depth) {
    int n = symexpr::max_order(e, lam.kind, lam.name);
    if (n < 0) return std::nullopt;
    if (n == 0) {
      auto cs = symexpr::coefficients(e, lam);
      if (cs.rbegin()->first != 1) throw NonlinearMultiplier("multiplier enters nonlinearly in " + e.str());
      if (cs.at(1).depends_on_kind(SymbolKind::Multiplier))
        throw NonlinearMultiplier("multiplier enters nonlinearly in " + e.str());
      return -(cs.count(0) ? cs.at(0) : Expr()) / cs.at(1);
    }
    auto f = antiderivative(e, F);
    if (!f) return std::nullopt;
    e = *f;
  }
  return std::nullopt;
}

}  // namespace

ELSystem eliminate_multiplier(const Context& ctx, const ELSystem& el, const InvariantLagrangian& L) {
  if (!L.multiplier) return el;
  const auto& F = ctx.space();
  const Symbol lam = *L.multiplier;
  ELSystem out = el;
  bool present = std::any_of(el.equations.begin(), el.equations.end(), [&](const Expr& e) { return mentions(e, lam); });
  if (ctx.spec->constraint->kind != "parametrization") {
    if (present) throw NonlinearMultiplier(ctx.spec->name + ": multiplier survives relation reduction");
    return out;
  }
  Bindings b = constraint_bindings(ctx, L);
  for (auto& e : out.equations) e = subst(e, b);
  std::optional<Expr> value;
  for (const auto& e : out.equations) {
    if (!mentions(e, lam)) continue;
    for (const auto& sym : e.free_symbols())
      if (sym.kind == SymbolKind::Multiplier) {
        auto cs = symexpr::coefficients(e, sym);
        if (cs.rbegin()->first > 1) throw NonlinearMultiplier("multiplier enters nonlinearly in " + e.str());
      }
    if ((value = solve_multiplier(e, lam, F))) break;
  }
  if (!value) throw NonlinearMultiplier(ctx.spec->name + ": no equation determines the multiplier");
  Bindings lb;
  int top = 0;
  for (const auto& d : F.dependent) top = std::max(top, symexpr::max_order(*value, d.kind, d.name));
  for (const auto& k : F.multi_indices(F.order - top)) lb[lam.with_deriv(k)] = subst(total_derivative(*value, k, F), b);
  for (auto& e : out.equations) e = subst(e, lb);
  for (auto& e : out.generator_euler) e = subst(subst(e, b), lb);
  out.multiplier_value = *value;
  out.eliminated = b;
  out.eliminated.insert(lb.begin(), lb.end());
  return out;
}

// ---- boundary terms ----

BoundaryCoefficients boundary_coeffs(const Context& ctx, const InvariantLagrangian& L) {
  const auto& s = *ctx.spec;
  const auto& t = *ctx.table;
  const auto& F = ctx.space();
  const auto& H = ctx.syzygies;
  const std::size_t q = s.dependent.size();
  Expr full = L.full();

  std::vector<Expr> W;
  for (std::size_t j = 0; j < s.generators.size(); ++j) {
    Expr w;
    for (std::size_t a = 0; a < q; ++a)
      for (const auto& [k, c] : H.at(j, a).terms()) w += c * Expr(t.variation_symbol(a, k));
    W.push_back(w);
  }

  std::map<Var, Expr> P;
  Expr integrand;
  std::vector<Expr> bulk(q);
  for (std::size_t j = 0; j < s.generators.size(); ++j) {
    const auto& name = s.generators[j].name;
    Expr ej;
    for (const auto& sym : full.free_symbols()) {
      if (sym.kind != SymbolKind::Generator || sym.name != name) continue;
      Expr a = symexpr::diff(full, sym);
      integrand += a * total_derivative(W[j], sym.deriv, F);
      ej += integrate_by_parts(a, sym.deriv, W[j], F, P);
    }
    for (std::size_t a = 0; a < q; ++a)
      for (const auto& [k, c] : H.at(j, a).terms())
        bulk[a] += integrate_by_parts(ej * c, k, Expr(t.variation_symbol(a, MultiIndex())), F, P);
  }

  BoundaryCoefficients out;
  out.independent = s.independent;
  out.dependents = s.dependent;
  Expr rhs;
  for (std::size_t a = 0; a < q; ++a) rhs += bulk[a] * Expr(t.variation_symbol(a, MultiIndex()));
  for (Var v : s.independent) rhs += total_derivative(P[v], v, F);
  if (!(integrand - rhs).is_zero())
    throw VerificationFailure(s.name + ": integration by parts identity does not hold");

  for (auto& e : bulk) e = simplify(ctx, e);
  out.bulk = bulk;
  for (Var v : s.independent) P[v] = simplify(ctx, P[v]);
  if (L.multiplier && s.constraint->kind == "syzygy") {
    Bindings none;
    for (const auto& [v, pv] : P)
      for (const auto& sym : pv.free_symbols())
        if (sym.kind == SymbolKind::Multiplier) none[sym] = Expr();
    Expr div;
    for (auto& [v, pv] : P) {
      Expr free = subst(pv, none);
      div += total_derivative(pv - free, v, F);
      pv = free;
    }
    if (!simplify(ctx, div).is_zero())
      throw VerificationFailure(s.name + ": multiplier terms of the boundary are not a null divergence");
    out.multiplier_dropped = !none.empty();
  }
  for (Var v : s.independent) {
    Expr pv = P[v];
    out.variation_form.push_back(pv);
    Bindings b;
    for (const auto& sym : pv.free_symbols())
      if (sym.kind == SymbolKind::Variation) b[sym] = t.variation(dependent_index(s, sym.name), sym.deriv);
    Expr tau = simplify(ctx, subst(pv, b));
    out.tau_form.push_back(tau);
    std::vector<std::map<MultiIndex, Expr>> ci(q);
    for (const auto& [sym, c] : frame::linear_form(tau, SymbolKind::TauInvariant)) {
      Expr cc = simplify(ctx, c);
      if (!cc.is_zero()) ci[dependent_index(s, sym.name)][sym.deriv] = cc;
    }
    out.C.push_back(std::move(ci));
  }
  return out;
}

// ---- conservation laws ----

Expr ConservationLawSet::component(std::size_t i, std::size_t k) const { return matrix_apply_row(ad_inverse, k, upsilon.at(i)); }

std::vector<Expr> ConservationLawSet::first_integrals() const {
  if (independent.size() != 1) throw std::invalid_argument("first integrals require one independent variable");
  std::vector<Expr> out;
  for (std::size_t k = 0; k < constants.size(); ++k) out.push_back(component(0, k) - Expr(constants[k]));
  return out;
}

ConservationLawSet noether_laws(const Context& ctx, const InvariantLagrangian& L) {
  const auto& s = *ctx.spec;
  const auto& t = *ctx.table;
  ConservationLawSet laws;
  laws.spec = &s;
  laws.independent = s.independent;
  laws.ad_inverse = frame::adjoint_inverse_at_frame(ctx.frame, liegroup::adjoint_matrix(s));
  laws.killing = liegroup::killing_form(s);
  laws.semisimple = s.semisimple && liegroup::inverse(laws.killing).has_value();
  for (std::size_t k = 0; k < s.dim(); ++k)
    laws.constants.emplace_back(SymbolKind::Constant, "c" + std::to_string(k + 1));

  auto el = eliminate_multiplier(ctx, invariant_el(ctx, L), L);
  laws.eliminated = el.eliminated;
  auto bc = boundary_coeffs(ctx, L);
  for (std::size_t i = 0; i < s.independent.size(); ++i) {
    std::vector<Expr> ups(s.dim());
    for (std::size_t a = 0; a < s.dependent.size(); ++a) {
      const auto& ci = bc.C[i][a];
      if (ci.empty()) continue;
      std::vector<MultiIndex> cols;
      for (const auto& [k, c] : ci) cols.push_back(k);
      auto omega = frame::invariantized_infinitesimals(t, a, cols);
      for (std::size_t k = 0; k < s.dim(); ++k)
        for (std::size_t col = 0; col < cols.size(); ++col)
          if (!omega[k][col].is_zero()) ups[k] += omega[k][col] * ci.at(cols[col]);
    }
    for (auto& u : ups) u = simplify(ctx, subst(simplify(ctx, u), laws.eliminated));
    laws.upsilon.push_back(std::move(ups));
  }
  for (std::size_t k = 0; k < s.dim(); ++k) {
    bool zero = true;
    for (std::size_t i = 0; i < laws.upsilon.size() && zero; ++i)
      zero = symexpr::is_zero(t.to_jets(laws.component(i, k)));
    laws.trivial.push_back(zero);
  }
  return laws;
}

Equation killing_first_integral(const ConservationLawSet& laws) {
  if (laws.independent.size() != 1) throw std::invalid_argument("the Killing first integral requires one independent variable");
  Matrix binv = killing_inverse(*laws.spec);
  const auto& u = laws.upsilon.front();
  Equation eq;
  for (std::size_t k = 0; k < u.size(); ++k)
    for (std::size_t l = 0; l < u.size(); ++l)
      if (!binv[k][l].is_zero()) {
        eq.lhs += binv[k][l] * u[k] * u[l];
        eq.rhs += binv[k][l] * Expr(laws.constants[k]) * Expr(laws.constants[l]);
      }
  normalize(eq);
  return eq;
}

std::vector<Equation> reduced_system(const Context& ctx, const ConservationLawSet& laws) {
  if (laws.independent.size() != 1) throw std::invalid_argument("the reduced system requires one independent variable");
  const auto& s = *laws.spec;
  Matrix binv = killing_inverse(s);
  const auto& u = laws.upsilon.front();
  if (std::all_of(u.begin(), u.end(), [](const Expr& e) { return e.is_zero(); })) return {};
  std::vector<Symbol> base;
  for (const auto& n : s.normalizations) base.push_back(n.coordinate);
  Matrix omega = liegroup::infinitesimal_matrix(s, base);
  std::vector<Expr> law(s.dim()), cvec(s.dim());
  for (std::size_t k = 0; k < s.dim(); ++k) {
    law[k] = laws.component(0, k);
    cvec[k] = Expr(laws.constants[k]);
  }
  std::vector<Equation> out;
  for (std::size_t a = 0; a < base.size(); ++a) {
    Equation eq;
    for (std::size_t k = 0; k < s.dim(); ++k) {
      if (omega[k][a].is_zero()) continue;
      eq.lhs += omega[k][a] * matrix_apply_row(binv, k, law);
      eq.rhs += omega[k][a] * matrix_apply_row(binv, k, cvec);
    }
    eq.lhs = simplify(ctx, eq.lhs);
    eq.coordinate = base[a];
    normalize(eq);
    if (symexpr::is_zero(ctx.table->to_jets(eq.lhs)) && eq.rhs.is_zero()) continue;
    out.push_back(eq);
  }
  return out;
}

// ---- oracle ----

std::vector<Expr> el_oracle_residuals(const Context& ctx, const InvariantLagrangian& L, const ELSystem& el) {
  const auto& s = *ctx.spec;
  const auto& t = *ctx.table;
  JetSpace js = s.jet_space(24);
  if (L.multiplier) js.dependent.push_back({SymbolKind::Multiplier, L.multiplier->name});
  Expr lj = t.to_jets(L.full());
  std::vector<std::vector<Expr>> jac(s.dependent.size(), std::vector<Expr>(s.dependent.size()));
  for (std::size_t a = 0; a < s.dependent.size(); ++a) {
    Expr ia = t.variation_explicit(a, MultiIndex());
    for (std::size_t b = 0; b < s.dependent.size(); ++b)
      jac[a][b] = symexpr::diff(ia, s.dependent_symbol(b, MultiIndex(Var::tau)));
  }
  std::vector<Expr> inv;
  for (const auto& e : el.equations) inv.push_back(t.to_jets(e));
  std::vector<Expr> out;
  for (std::size_t b = 0; b < s.dependent.size(); ++b) {
    Expr classical = jetcalc::euler_operator(lj, DependentVar{SymbolKind::Jet, s.dependent[b]}, js);
    Expr r = -classical;
    for (std::size_t a = 0; a < s.dependent.size(); ++a) r += inv[a] * jac[a][b];
    out.push_back(r);
  }
  return out;
}

bool equal_up_to_constant(const Expr& a, const Expr& b, Expr* factor) {
  if (a.is_zero() || b.is_zero()) {
    if (factor) *factor = Expr(a.is_zero() && b.is_zero() ? 1 : 0);
    return a.is_zero() && b.is_zero();
  }
  Expr q = a / b;
  if (factor) *factor = q;
  return q.is_constant();
}

}  // namespace mframe::varcalc
