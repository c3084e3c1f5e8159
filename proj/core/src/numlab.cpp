#include "mframe/numlab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <optional>
#include <random>
#include <set>

#include <fmt/format.h>

namespace mframe::numlab {

using jetcalc::DependentVar;
using jetcalc::JetSpace;
using symexpr::MultiIndex;
using symexpr::Rational;
using symexpr::SymbolKind;

namespace {

Expr expand(const Expr& e, const Bindings& derived) {
  Expr out = e;
  for (int pass = 0; pass < 64; ++pass) {
    Bindings b;
    for (const auto& s : out.free_symbols())
      if (auto it = derived.find(s); it != derived.end()) b.emplace(s, it->second);
    if (b.empty()) return out;
    out = symexpr::subst(out, b);
  }
  throw NonExplicitSystem("derived symbols do not resolve");
}

Var first_derivative_var(const std::vector<Expr>& eqs) {
  for (const auto& e : eqs)
    for (const auto& s : e.free_symbols())
      for (int v = 0; v < symexpr::kNumVars; ++v)
        if (s.deriv.count(static_cast<Var>(v)) > 0) return static_cast<Var>(v);
  throw NonExplicitSystem("equations contain no derivatives");
}

bool zero(const Expr& e) { return e.is_zero() || symexpr::is_zero(e); }

// Solves sum_j M_ij t_j + r_i = 0 for the unknowns t.
std::vector<Expr> solve_linear(const std::vector<Expr>& eqs, const std::vector<Symbol>& unknowns) {
  const std::size_t n = unknowns.size();
  liegroup::Matrix m(n, std::vector<Expr>(n));
  Bindings at_zero;
  for (const auto& u : unknowns) at_zero[u] = Expr(0);
  std::vector<Expr> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m[i][j] = symexpr::diff(eqs[i], unknowns[j]);
      for (const auto& u : unknowns)
        if (m[i][j].depends_on(u)) throw NonExplicitSystem("equation is nonlinear in " + u.text());
    }
    r[i] = symexpr::subst(eqs[i], at_zero);
  }
  liegroup::Matrix inv;
  try {
    inv = liegroup::inverse(m);
  } catch (const liegroup::RankDeficient&) {
    throw NonExplicitSystem("highest derivatives are not solvable");
  }
  std::vector<Expr> out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i] -= inv[i][j] * r[j];
  return out;
}

int order_in(const Symbol& s, Var v) { return s.deriv.count(v); }

Symbol lift(const Symbol& s, Var v, int k) { return s.with_deriv(MultiIndex(v, k)); }

// Derivative along the flow of the system's state.
Expr flow(const Expr& e, const ExplicitSystem& sys) {
  Expr out;
  for (std::size_t i = 0; i < sys.state.size(); ++i)
    if (e.depends_on(sys.state[i])) out += symexpr::diff(e, sys.state[i]) * sys.rates[i];
  return out;
}

}  // namespace

ExplicitSystem explicit_system(const std::vector<Expr>& equations, const Bindings& fixed) {
  std::vector<Expr> eqs;
  for (const auto& e : equations) {
    Expr r = expand(e, fixed);
    if (!zero(r)) eqs.push_back(r);
  }
  if (eqs.empty()) throw NonExplicitSystem("no nontrivial equations");
  ExplicitSystem sys;
  sys.independent = first_derivative_var(eqs);
  const Var v = sys.independent;
  std::map<Symbol, int> top;
  for (const auto& e : eqs)
    for (const auto& s : e.free_symbols()) {
      if (s.kind == SymbolKind::Multiplier) throw NonExplicitSystem("multiplier " + s.text() + " is still present");
      if (s.kind != SymbolKind::Generator) continue;
      if (s.deriv.order() != order_in(s, v)) throw NonExplicitSystem("mixed derivative " + s.text());
      int& t = top[s.base()];
      t = std::max(t, order_in(s, v));
    }
  std::vector<Symbol> unknowns;
  for (const auto& [g, n] : top) {
    if (n == 0) throw NonExplicitSystem(g.text() + " enters algebraically");
    unknowns.push_back(lift(g, v, n));
  }
  if (unknowns.size() != eqs.size())
    throw NonExplicitSystem(fmt::format("{} equations for {} unknown generators", eqs.size(), unknowns.size()));
  auto sol = solve_linear(eqs, unknowns);
  sys.derived = fixed;
  std::size_t u = 0;
  for (const auto& [g, n] : top) {
    for (int k = 0; k < n; ++k) {
      sys.state.push_back(k == 0 ? g : lift(g, v, k));
      sys.rates.push_back(k + 1 < n ? Expr(lift(g, v, k + 1)) : sol[u]);
    }
    sys.derived[unknowns[u]] = sol[u];
    ++u;
  }
  for (const auto& [g, n] : top) {
    Expr prev = sys.derived.at(lift(g, v, n));
    for (int k = n + 1; k <= n + 3; ++k) {
      prev = flow(prev, sys);
      sys.derived[lift(g, v, k)] = prev;
    }
  }
  return sys;
}

ExplicitSystem explicit_system(const varcalc::ELSystem& el) {
  Bindings fixed;
  for (const auto& [k, e] : el.eliminated)
    if (k.kind != SymbolKind::Multiplier) fixed.emplace(k, e);
  return explicit_system(el.equations, fixed);
}

ExplicitSystem with_curve(const ExplicitSystem& base, const varcalc::Context& ctx) {
  const auto& spec = *ctx.spec;
  if (spec.independent.size() != 1) throw NonExplicitSystem("curve reconstruction needs one independent variable");
  const Var v = spec.independent.front();
  ExplicitSystem sys = base;
  std::vector<DependentVar> deps;
  for (const auto& d : spec.dependent) deps.push_back({SymbolKind::Jet, d});
  for (const auto& g : spec.generators) deps.push_back({SymbolKind::Generator, g.name});
  std::vector<Symbol> tops(spec.dependent.size());
  std::map<std::size_t, Expr> defs;  // dependent -> definition minus generator
  for (const auto& g : spec.generators) {
    std::size_t a = std::find(spec.dependent.begin(), spec.dependent.end(), g.coordinate.name) - spec.dependent.begin();
    if (a == spec.dependent.size() || !tops[a].name.empty())
      throw NonExplicitSystem("generator " + g.name + " does not fix a new dependent");
    tops[a] = g.coordinate;
    defs[a] = ctx.table->definition(Symbol(SymbolKind::Generator, g.name)) - Expr(Symbol(SymbolKind::Generator, g.name));
  }
  auto norm_value = [&](const Symbol& c) -> std::optional<double> {
    for (const auto& n : spec.normalizations)
      if (n.coordinate == c) return n.value.get_d();
    return std::nullopt;
  };
  if (spec.dependent.size() == 1 && spec.generators.size() == 1 && tops[0].deriv.order() == 3) {
    // Schwarzian generator: u = y1/y2 with y'' + sigma y / 2 = 0 stays finite through poles of u
    const Symbol u(SymbolKind::Jet, spec.dependent[0]);
    const Expr u1(lift(u, v, 1)), u2(lift(u, v, 2)), u3(lift(u, v, 3));
    const Expr g(Symbol(SymbolKind::Generator, spec.generators[0].name));
    if (zero(defs[0] + g - (u3 / u1 - Expr(Rational(3, 2)) * (u2 / u1).pow(2)))) {
      const Symbol y1(SymbolKind::Jet, "y1"), y2(SymbolKind::Jet, "y2");
      const Expr q = expand(g, sys.derived) / 2;
      for (const auto& y : {y1, y2}) {
        sys.state.push_back(y);
        sys.rates.push_back(Expr(lift(y, v, 1)));
        sys.state.push_back(lift(y, v, 1));
        sys.rates.push_back(-q * Expr(y));
      }
      Expr e = Expr(y1) / Expr(y2);
      sys.derived[u] = e;
      for (int k = 1; k <= 5; ++k) {
        e = flow(e, sys);
        sys.derived[lift(u, v, k)] = e;
      }
      const double a0 = norm_value(u).value_or(0.0), a1 = norm_value(lift(u, v, 1)).value_or(1.0),
                   a2 = norm_value(lift(u, v, 2)).value_or(0.0);
      const double dy2 = -a2 / (2.0 * a1);
      sys.curve_start = {{y1, a0}, {lift(y1, v, 1), a1 + a0 * dy2}, {y2, 1.0}, {lift(y2, v, 1), dy2}};
      return sys;
    }
  }
  const bool angle = !spec.angle_parameters.empty() && spec.constraint && spec.constraint->kind == "parametrization";
  Bindings solved;
  std::vector<Symbol> curve_state;
  if (angle) {
    // unit speed: x_s = cos psi, u_s = sin psi, psi_s = curvature
    if (spec.dependent.size() != 2) throw NonExplicitSystem("tangent angle needs a plane curve");
    const Symbol psi(SymbolKind::Jet, "psi");
    const Symbol* kappa = nullptr;
    for (const auto& g : spec.generators)
      if (g.coordinate.deriv.order() == 2) kappa = &g.coordinate;
    if (!kappa) throw NonExplicitSystem("no curvature generator");
    std::string kname;
    for (const auto& g : spec.generators)
      if (g.coordinate == *kappa) kname = g.name;
    for (const auto& g : spec.generators)
      if (g.name != kname && !zero(expand(Expr(Symbol(SymbolKind::Generator, g.name)), sys.derived) - Expr(1)))
        throw NonExplicitSystem("tangent angle needs unit speed");
    deps.push_back({SymbolKind::Jet, "psi"});
    solved[lift(Symbol(SymbolKind::Jet, spec.dependent[0]), v, 1)] = symexpr::cos(Expr(psi));
    solved[lift(Symbol(SymbolKind::Jet, spec.dependent[1]), v, 1)] = symexpr::sin(Expr(psi));
    solved[lift(psi, v, 1)] = Expr(Symbol(SymbolKind::Generator, kname));
    for (std::size_t a = 0; a < 2; ++a) tops[a] = lift(Symbol(SymbolKind::Jet, spec.dependent[a]), v, 1);
    defs.clear();
    curve_state = {Symbol(SymbolKind::Jet, spec.dependent[0]), Symbol(SymbolKind::Jet, spec.dependent[1]), psi};
  } else {
    for (std::size_t a = 0; a < spec.dependent.size(); ++a)
      for (int k = 0; k < tops[a].deriv.order(); ++k)
        curve_state.push_back(k == 0 ? Symbol(SymbolKind::Jet, spec.dependent[a]) : lift(Symbol(SymbolKind::Jet, spec.dependent[a]), v, k));
  }
  const JetSpace js({v}, deps, 16);
  std::set<Symbol> state(sys.state.begin(), sys.state.end());
  state.insert(curve_state.begin(), curve_state.end());
  std::map<Symbol, Expr> memo;
  struct Pending {};
  std::function<Expr(const Expr&)> resolve_expr;
  std::function<Expr(const Symbol&)> resolve = [&](const Symbol& s) -> Expr {
    if (state.count(s)) return Expr(s);
    if (auto it = memo.find(s); it != memo.end()) return it->second;
    Expr out;
    if (auto it = solved.find(s); it != solved.end()) {
      out = resolve_expr(it->second);
    } else if (auto jt = sys.derived.find(s); jt != sys.derived.end()) {
      out = resolve_expr(jt->second);
    } else if (s.deriv.order() > 0) {
      Var w = s.deriv.sequence().back();
      if (s.kind == SymbolKind::Jet && !angle) {
        std::size_t a = std::find(spec.dependent.begin(), spec.dependent.end(), s.name) - spec.dependent.begin();
        if (a < tops.size() && s.deriv.order() >= tops[a].deriv.order() && !solved.count(tops[a])) throw Pending{};
      }
      out = resolve_expr(jetcalc::total_derivative(resolve(s.with_deriv(*s.deriv.minus(w))), w, js));
    } else {
      throw MissingVariable("no value for " + s.text());
    }
    memo.emplace(s, out);
    return out;
  };
  resolve_expr = [&](const Expr& e) {
    Bindings b;
    for (const auto& s : e.free_symbols())
      if (s.kind == SymbolKind::Jet || s.kind == SymbolKind::Generator) b.emplace(s, resolve(s));
    return b.empty() ? e : symexpr::subst(e, b);
  };
  while (!defs.empty()) {
    bool progress = false;
    for (auto it = defs.begin(); it != defs.end();) {
      const Symbol top = tops[it->first];
      Bindings b;
      bool ready = true;
      for (const auto& s : it->second.free_symbols()) {
        if (s == top || state.count(s)) continue;
        try {
          b.emplace(s, resolve(s));
        } catch (const Pending&) {
          ready = false;
          break;
        }
      }
      if (!ready) {
        ++it;
        continue;
      }
      Expr e = symexpr::subst(it->second, b);
      solved[top] = solve_linear({e}, {top}).front();
      memo.clear();
      it = defs.erase(it);
      progress = true;
    }
    if (!progress) throw NonExplicitSystem("generator definitions are not solvable for the curve");
  }
  memo.clear();
  for (const auto& c : curve_state) {
    sys.state.push_back(c);
    sys.rates.push_back(resolve(lift(c, v, order_in(c, v) + 1)));
  }
  for (const auto& s : curve_state) {
    if (s.name == "psi") {
      sys.derived[lift(s, v, 1)] = resolve(lift(s, v, 1));
      continue;
    }
    for (int k = order_in(s, v) + 1; k <= order_in(s, v) + 3; ++k) sys.derived[lift(s.base(), v, k)] = resolve(lift(s.base(), v, k));
  }
  for (auto& [k, e] : sys.derived) e = resolve_expr(e);
  for (const auto& c : curve_state) {
    if (c.name == "psi") {
      sys.curve_start[c] = 0.0;
      continue;
    }
    auto val = norm_value(c);
    if (!val) throw MissingVariable("no initial value for " + c.text());
    sys.curve_start[c] = *val;
  }
  return sys;
}

int Trajectory::column(const Symbol& c) const {
  auto it = std::find(columns.begin(), columns.end(), c);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

CompiledExpr Trajectory::compile(const Expr& e, const std::vector<Symbol>& extra) const {
  Bindings live;
  for (const auto& [k, v] : derived)
    if (column(k) < 0) live.emplace(k, v);
  Expr x = expand(e, live);
  std::vector<Symbol> slots = columns;
  slots.insert(slots.end(), extra.begin(), extra.end());
  std::vector<std::string> missing;
  for (const auto& s : x.free_symbols())
    if (std::find(slots.begin(), slots.end(), s) == slots.end()) missing.push_back(s.text());
  if (!missing.empty()) throw MissingVariable("trajectory lacks " + fmt::format("{}", fmt::join(missing, ", ")));
  return CompiledExpr(x, slots);
}

std::vector<double> Trajectory::evaluate(const Expr& e) const {
  auto f = compile(e);
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = f(values[i]);
  return out;
}

void Trajectory::set_column(const Symbol& c, std::vector<double> v) {
  if (v.size() != size()) throw std::invalid_argument("column length differs from the grid");
  int k = column(c);
  if (k < 0) {
    columns.push_back(c);
    for (std::size_t i = 0; i < size(); ++i) values[i].push_back(v[i]);
  } else {
    for (std::size_t i = 0; i < size(); ++i) values[i][k] = v[i];
  }
}

Trajectory integrate_el(const ExplicitSystem& sys, const std::map<Symbol, double>& init, double span, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step must be positive");
  if (!(span >= 0.0)) throw std::invalid_argument("span must be nonnegative");
  const std::size_t n = sys.state.size();
  std::vector<CompiledExpr> f;
  for (const auto& r : sys.rates) f.emplace_back(r, sys.state);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = init.find(sys.state[i]);
    if (it == init.end()) throw MissingVariable("no initial value for " + sys.state[i].text());
    y[i] = it->second;
  }
  const auto steps = static_cast<std::size_t>(std::llround(span / h));
  Trajectory t;
  t.h = h;
  t.columns = sys.state;
  t.derived = sys.derived;
  t.s.reserve(steps + 1);
  t.values.reserve(steps + 1);
  t.s.push_back(0.0);
  t.values.push_back(y);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto rate = [&](const std::vector<double>& at, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f[i](at);
  };
  for (std::size_t step = 1; step <= steps; ++step) {
    rate(y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rate(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rate(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    rate(tmp, k4);
    const double s = static_cast<double>(step) * h;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(y[i]) || std::abs(y[i]) > kBlowUp)
        throw BlowUp(s, fmt::format("{} exceeds {:g} at s = {:.6g}", sys.state[i].text(), kBlowUp, s));
    }
    t.s.push_back(s);
    t.values.push_back(y);
  }
  return t;
}

void VerificationReport::add(std::string name, double residual, double tolerance, int samples, std::string note) {
  checks.push_back({std::move(name), residual, tolerance, residual <= tolerance, samples, false, std::move(note)});
}

void VerificationReport::add_info(std::string name, double residual, double tolerance, int samples, std::string note) {
  checks.push_back({std::move(name), residual, tolerance, residual <= tolerance, samples, true, std::move(note)});
}

void VerificationReport::append(const VerificationReport& o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }

bool VerificationReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.informational || c.pass; });
}

std::vector<double> law_constants(const varcalc::ConservationLawSet& laws, const Trajectory& traj) {
  if (traj.size() == 0) throw std::invalid_argument("empty trajectory");
  std::vector<double> c;
  for (std::size_t k = 0; k < laws.constants.size(); ++k) c.push_back(traj.compile(laws.component(0, k))(traj.values[0]));
  return c;
}

VerificationReport check_constancy(const varcalc::ConservationLawSet& laws, const Trajectory& traj, double tolerance) {
  VerificationReport r;
  for (std::size_t k = 0; k < laws.constants.size(); ++k) {
    auto v = traj.evaluate(laws.component(0, k));
    double dev = 0.0;
    for (double x : v) dev = std::max(dev, std::abs(x - v.front()));
    if (std::any_of(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }))
      dev = std::numeric_limits<double>::infinity();
    r.add(fmt::format("law {} constant", k + 1), dev, tolerance, static_cast<int>(v.size()),
          fmt::format("c{} = {:.12g}", k + 1, v.front()));
  }
  return r;
}

double max_residual(const Trajectory& traj, const Expr& e, const std::vector<double>& c) {
  std::vector<Symbol> cs;
  for (std::size_t k = 0; k < c.size(); ++k) cs.emplace_back(SymbolKind::Constant, "c" + std::to_string(k + 1));
  auto f = traj.compile(e, cs);
  double m = 0.0;
  std::vector<double> row;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    row = traj.values[i];
    row.insert(row.end(), c.begin(), c.end());
    double x = f(row);
    if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(x));
  }
  return m;
}

VerificationReport check_killing(const varcalc::ConservationLawSet& laws, const Trajectory& traj, double tolerance) {
  VerificationReport r;
  auto eq = varcalc::killing_first_integral(laws);
  auto v = traj.evaluate(eq.lhs);
  double dev = 0.0;
  for (double x : v) dev = std::max(dev, std::abs(x - v.front()));
  r.add("Killing integral constant", dev, tolerance, static_cast<int>(v.size()));
  auto c = law_constants(laws, traj);
  Trajectory first = traj;
  first.s.resize(1);
  first.values.resize(1);
  r.add("Killing integral equals c^T B^-1 c", max_residual(first, eq.residual(), c), tolerance, 1);
  return r;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& s, const std::vector<double>& f) {
  std::vector<double> out(s.size(), 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) out[i] = out[i - 1] + 0.5 * (s[i] - s[i - 1]) * (f[i] + f[i - 1]);
  return out;
}

namespace {

struct Sampled {
  std::vector<double> v, d1, d2;  // value and two derivatives
};

// X = A + sign B tanh(beta f / 2), A = c1/(2 c2), B = beta/(2 c2), with f' and f'' given.
Sampled tanh_branch(double c1, double c2, double beta, double c4, int sign, const std::vector<double>& fq,
                    const std::vector<double>& f1, const std::vector<double>& f2) {
  Sampled x;
  const double a = c1 / (2.0 * c2), b = sign * beta / (2.0 * c2);
  for (std::size_t i = 0; i < fq.size(); ++i) {
    const double t = std::tanh(0.5 * beta * (fq[i] + c4));
    const double s2 = 1.0 - t * t;
    x.v.push_back(a + b * t);
    x.d1.push_back(b * 0.5 * beta * s2 * f1[i]);
    x.d2.push_back(b * 0.5 * beta * (-beta * t * s2 * f1[i] * f1[i] + s2 * f2[i]));
  }
  return x;
}

// c4 with X(0) = x0.
double match_constant(double c1, double c2, double beta, int sign, double x0) {
  const double arg = sign * (2.0 * c2 * x0 - c1) / beta;
  if (!(std::abs(arg) < 1.0))
    throw DegenerateReconstruction(fmt::format("initial value outside the tanh range: |(2 c2 x0 - c1)/beta| = {:.6g}", std::abs(arg)));
  return 2.0 * std::atanh(arg) / beta;
}

void require_nonzero(const std::vector<double>& v, const std::string& what, const Trajectory& t) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(std::abs(v[i]) > kSingular) || (i > 0 && (v[i] > 0) != (v[i - 1] > 0)))
      throw DegenerateReconstruction(fmt::format("{} vanishes at s = {:.6g}", what, t.s[i]));
}

Symbol jet(const std::string& n, Var v, int k = 0) {
  return k == 0 ? Symbol(SymbolKind::Jet, n) : Symbol(SymbolKind::Jet, n, MultiIndex(v, k));
}

Expr flow_derivative(const Expr& e, const Trajectory& t, const JetSpace& gs) {
  Var v = gs.independent.front();
  Bindings live;
  for (const auto& [k, x] : t.derived)
    if (t.column(k) < 0 && k.kind == SymbolKind::Generator) live.emplace(k, x);
  return jetcalc::total_derivative(expand(e, live), v, gs);
}

}  // namespace

Reconstruction reconstruct_curve(const std::string& entry, const Trajectory& traj, const std::vector<double>& c) {
  const auto& spec = liegroup::catalog(entry);
  if (spec.independent.size() != 1) throw std::invalid_argument(entry + ": reconstruction needs one independent variable");
  const Var v = spec.independent.front();
  const auto& ctx = varcalc::context(spec);
  auto L = varcalc::parse_lagrangian(ctx, traj.lagrangian);
  auto el = varcalc::eliminate_multiplier(ctx, varcalc::invariant_el(ctx, L), L);
  auto laws = varcalc::noether_laws(ctx, L);
  Reconstruction out{traj, {}};
  Trajectory& t = out.traj;
  VerificationReport& rep = out.report;
  const JetSpace gs = spec.generator_space(16);
  auto euler = [&](const std::string& g) {
    auto it = std::find(el.generators.begin(), el.generators.end(), g);
    if (it == el.generators.end()) throw MissingVariable("no generator " + g);
    return symexpr::subst(el.generator_euler[it - el.generators.begin()], el.eliminated);
  };
  auto previous = [&](const Symbol& s) -> std::optional<std::vector<double>> {
    try {
      return traj.evaluate(Expr(s));
    } catch (const MissingVariable&) {
      return std::nullopt;
    }
  };
  auto compare = [&](const Symbol& s, const std::vector<double>& now) {
    if (auto before = previous(s)) {
      double m = 0.0;
      for (std::size_t i = 0; i < now.size(); ++i) m = std::max(m, std::abs(now[i] - (*before)[i]));
      rep.add(fmt::format("closed form {} agrees with the integrated curve", s.text()), m, 1e-5, static_cast<int>(now.size()),
              "trapezoid quadrature error O(h^2)");
    }
  };
  if (std::all_of(c.begin(), c.end(), [](double x) { return std::abs(x) <= 1e-12; }))
    throw varcalc::ZeroConstants("all law constants vanish; the c = 0 case is not reconstructed");
  t.constants.clear();
  for (std::size_t k = 0; k < c.size(); ++k) t.constants[fmt::format("c{}", k + 1)] = c[k];

  if (spec.name == "se2-curve") {
    if (c.size() != 3) throw std::invalid_argument("se2-curve has three constants");
    auto kappa = t.evaluate(Expr(Symbol(SymbolKind::Generator, "kappa")));
    auto psi = cumulative_trapezoid(t.s, kappa);
    std::vector<double> cs(psi.size()), sn(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
      cs[i] = std::cos(psi[i]);
      sn[i] = std::sin(psi[i]);
    }
    auto x = cumulative_trapezoid(t.s, cs), u = cumulative_trapezoid(t.s, sn);
    compare(jet("x", v), x);
    compare(jet("u", v), u);
    t.set_column(jet("psi", v), psi);
    t.set_column(jet("x", v), x);
    t.set_column(jet("u", v), u);
    t.set_column(jet("x", v, 1), cs);
    t.set_column(jet("u", v, 1), sn);
    const Expr k(Symbol(SymbolKind::Generator, "kappa")), ks(Symbol(SymbolKind::Generator, "kappa", MultiIndex(v, 1)));
    const Expr c1(Symbol(SymbolKind::Constant, "c1")), c2(Symbol(SymbolKind::Constant, "c2")), c3(Symbol(SymbolKind::Constant, "c3"));
    const Expr xx(jet("x", v)), uu(jet("u", v)), us(jet("u", v, 1));
    rep.add("kappa^4 + 4 kappa_s^2 - (c1^2 + c2^2)", max_residual(t, k.pow(4) + 4 * ks.pow(2) - (c1.pow(2) + c2.pow(2)), c), 1e-6,
            static_cast<int>(t.size()));
    rep.add("c1 u - c2 x + c3 - 2 kappa", max_residual(t, c1 * uu - c2 * xx + c3 - 2 * k, c), 1e-6, static_cast<int>(t.size()));
    rep.add("u_s (c1^2 + c2^2) + c2 kappa^2 - 2 c1 kappa_s",
            max_residual(t, us * (c1.pow(2) + c2.pow(2)) + c2 * k.pow(2) - 2 * c1 * ks, c), 1e-6, static_cast<int>(t.size()));
    t.notes.push_back("x, u by trapezoid quadrature of x_s = cos psi, u_s = sin psi, psi_s = kappa");
    return out;
  }

  if (c.size() != 3) throw std::invalid_argument(entry + " has three constants");
  const auto rows = varcalc::reduced_system(ctx, laws);
  const double c1 = c[0], c2 = c[1], c3 = c[2];
  if (!(std::abs(c2) > kSingular)) throw DegenerateReconstruction("c2 vanishes");
  const Expr es = euler("sigma");
  const auto E = t.evaluate(es);
  require_nonzero(E, "E^sigma(L)", t);
  const auto Es = t.evaluate(flow_derivative(es, t, gs));
  const double k = spec.name == "sl2-action3" ? 6.0 : 2.0;
  std::vector<double> f1(E.size()), f2(E.size());
  for (std::size_t i = 0; i < E.size(); ++i) {
    f1[i] = 1.0 / (k * E[i]);
    f2[i] = -Es[i] / (k * E[i] * E[i]);
  }
  const auto fq = cumulative_trapezoid(t.s, f1);
  const int sign = spec.name == "sl2-action3" ? 1 : -1;
  const std::string xname = spec.name == "sl2-action1" ? "u" : "x";
  const double x0 = [&] {
    for (const auto& n : spec.normalizations)
      if (n.coordinate == jet(xname, v)) return n.value.get_d();
    return 0.0;
  }();

  auto build = [&](double radicand, Trajectory& target) {
    if (!(radicand > 0.0)) throw DegenerateReconstruction(fmt::format("beta^2 = {:.6g} is not positive", radicand));
    const double beta = std::sqrt(radicand);
    const double c4 = match_constant(c1, c2, beta, sign, x0);
    auto X = tanh_branch(c1, c2, beta, c4, sign, fq, f1, f2);
    if (spec.name == "sl2-action1") {
      target.set_column(jet("u", v), X.v);
      target.set_column(jet("u", v, 1), X.d1);
      target.set_column(jet("u", v, 2), X.d2);
    } else if (spec.name == "sl2-action2") {
      std::vector<double> u(E.size());
      for (std::size_t i = 0; i < E.size(); ++i) {
        const double th = std::tanh(0.5 * beta * (fq[i] + c4));
        u[i] = -radicand / (8.0 * c2 * E[i]) * (1.0 - th * th);
      }
      target.set_column(jet("x", v), X.v);
      target.set_column(jet("x", v, 1), X.d1);
      target.set_column(jet("u", v), u);
      target.set_column(jet("u", v, 1), X.d2);
    } else {
      const Expr eh = euler("eta");
      const auto H = target.evaluate(eh);
      const auto Hs = target.evaluate(flow_derivative(eh, target, gs));
      std::vector<double> u(E.size()), us(E.size()), den(E.size());
      for (std::size_t i = 0; i < E.size(); ++i) {
        const double x = X.v[i], xs = X.d1[i];
        const double n = 3.0 * c1 - 6.0 * c2 * x - 6.0 * H[i];
        const double d = -c1 * x + c2 * x * x - c3;
        den[i] = d;
        const double ns = -6.0 * c2 * xs - 6.0 * Hs[i], ds = (-c1 + 2.0 * c2 * x) * xs;
        u[i] = n / d;
        us[i] = (ns * d - n * ds) / (d * d);
      }
      require_nonzero(den, "-c1 x + c2 x^2 - c3", target);
      target.set_column(jet("x", v), X.v);
      target.set_column(jet("x", v, 1), X.d1);
      target.set_column(jet("x", v, 2), X.d2);
      target.set_column(jet("u", v), u);
      target.set_column(jet("u", v, 1), us);
    }
    return beta;
  };

  const double r1 = c1 * c1 + 4.0 * c2 * c3, r2 = c2 * c2 + 4.0 * c2 * c3;
  const auto& first = rows.front();
  auto row_residual = [&](const Trajectory& tt, const varcalc::Equation& eq) { return max_residual(tt, eq.residual(), c); };
  {
    Trajectory alt = traj;
    double res = std::numeric_limits<double>::infinity();
    std::string note = "beta = sqrt(c2^2 + 4 c2 c3)";
    try {
      build(r2, alt);
      res = row_residual(alt, first);
    } catch (const DegenerateReconstruction& e) {
      note += fmt::format(": {}", e.what());
    }
    rep.add_info("radicand c2^2 + 4 c2 c3", res, 1e-8, static_cast<int>(t.size()), note);
  }
  const double beta = build(r1, t);
  compare(jet(xname, v), t.evaluate(Expr(jet(xname, v))));
  rep.add_info("radicand c1^2 + 4 c2 c3", row_residual(t, first), 1e-8, static_cast<int>(t.size()), "beta = sqrt(c1^2 + 4 c2 c3)");
  for (const auto& row : rows) {
    std::string name = fmt::format("reduced row {}", row.coordinate ? row.coordinate->text() : "?");
    try {
      rep.add(name, row_residual(t, row), 1e-8, static_cast<int>(t.size()));
    } catch (const MissingVariable& e) {
      rep.add(name, std::numeric_limits<double>::infinity(), 1e-8, 0, e.what());
    }
  }
  if (spec.name == "sl2-action2") {
    const Expr d = Expr(jet("x", v, 1)) - Expr(jet("u", v));
    rep.add("x_s = u", max_residual(t, d, c), 1e-8, static_cast<int>(t.size()));
  }
  t.constants["c4"] = match_constant(c1, c2, beta, sign, x0);
  t.constants["beta"] = beta;
  t.notes.push_back(fmt::format("f = trapezoid integral of 1/({:g} E^sigma(L)) + c4, c4 matches {} at the first node", k, xname));
  return out;
}

VerificationReport fd_audit(const Expr& e, const Expr& claimed, const std::vector<Symbol>& vars, std::uint64_t seed,
                            int points, double tolerance) {
  if (vars.size() != 1) throw std::invalid_argument("fd_audit differentiates in one variable");
  const Symbol& var = vars.front();
  std::set<Symbol> fs = e.free_symbols();
  for (const auto& s : claimed.free_symbols()) fs.insert(s);
  fs.insert(var);
  std::vector<Symbol> slots(fs.begin(), fs.end());
  const std::size_t vi = std::find(slots.begin(), slots.end(), var) - slots.begin();
  CompiledExpr fe(e, slots), fc(claimed, slots);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.5, 2.0);
  double worst = 0.0;
  int got = 0;
  for (int attempt = 0; got < points; ++attempt) {
    if (attempt >= 50 * points) throw SamplingExhausted(fmt::format("only {} of {} admissible points", got, points));
    std::vector<double> p(slots.size());
    for (auto& x : p) x = dist(rng);
    const double h = 1e-3 * std::max(1.0, std::abs(p[vi]));
    auto at = [&](double dx) {
      auto q = p;
      q[vi] += dx;
      return fe(q);
    };
    double fd = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    double cl = fc(p);
    if (!std::isfinite(fd) || !std::isfinite(cl)) continue;
    worst = std::max(worst, std::abs(fd - cl) / std::max(1.0, std::abs(cl)));
    ++got;
  }
  VerificationReport r;
  r.add(fmt::format("d/d{} by central differences", var.text()), worst, tolerance, got);
  return r;
}

VerificationReport fd_audit_total(const Expr& e, const Expr& claimed, const JetSpace& js, std::uint64_t seed, int points,
                                  double tolerance) {
  if (js.independent.size() != 1) throw std::invalid_argument("fd_audit_total needs one independent variable");
  const Var v = js.independent.front();
  const Symbol xs = js.independent_symbol(v);
  std::set<Symbol> fs = e.free_symbols();
  for (const auto& s : claimed.free_symbols()) fs.insert(s);
  fs.insert(xs);
  std::vector<Symbol> slots(fs.begin(), fs.end());
  for (const auto& s : slots)
    if (s != xs && !js.is_dependent(s)) throw std::invalid_argument("free symbol " + s.text() + " is not a jet coordinate");
  CompiledExpr fe(e, slots), fc(claimed, slots);
  constexpr int kDegree = 8;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), lead(0.5, 1.5), where(-0.3, 0.3);
  std::vector<double> fact(kDegree + 1, 1.0);
  for (int k = 1; k <= kDegree; ++k) fact[k] = fact[k - 1] * k;
  double worst = 0.0;
  int got = 0;
  for (int attempt = 0; got < points; ++attempt) {
    if (attempt >= 50 * points) throw SamplingExhausted(fmt::format("only {} of {} admissible points", got, points));
    // u^a(x) = sum_k a_k x^k / k!
    std::map<std::string, std::vector<double>> curve;
    for (const auto& d : js.dependent) {
      std::vector<double> a(kDegree + 1);
      for (int k = 0; k <= kDegree; ++k) a[k] = coef(rng);
      a[0] = lead(rng);
      a[1] = lead(rng);
      curve[d.name] = a;
    }
    auto point = [&](double x) {
      std::vector<double> p(slots.size());
      for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& s = slots[i];
        if (s == xs) {
          p[i] = x;
          continue;
        }
        const auto& a = curve.at(s.name);
        const int m = s.deriv.order();
        double val = 0.0;
        for (int k = m; k <= kDegree; ++k) val += a[k] * std::pow(x, k - m) / fact[k - m];
        p[i] = val;
      }
      return p;
    };
    const double x0 = where(rng), h = 1e-3;
    auto F = [&](double x) { return fe(point(x)); };
    double fd = (-F(x0 + 2 * h) + 8 * F(x0 + h) - 8 * F(x0 - h) + F(x0 - 2 * h)) / (12 * h);
    double cl = fc(point(x0));
    if (!std::isfinite(fd) || !std::isfinite(cl)) continue;
    worst = std::max(worst, std::abs(fd - cl) / std::max(1.0, std::abs(cl)));
    ++got;
  }
  VerificationReport r;
  r.add(fmt::format("D_{} along sampled curves", symexpr::var_name(v)), worst, tolerance, got);
  return r;
}

double convergence_order(const ExplicitSystem& sys, const std::map<Symbol, double>& init, double span, double h) {
  auto end = [&](double step) { return integrate_el(sys, init, span, step).values.back(); };
  const auto ref = end(h / 16.0), a = end(h), b = end(h / 2.0);
  double ea = 0.0, eb = 0.0, scale = 1.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ea = std::max(ea, std::abs(a[i] - ref[i]));
    eb = std::max(eb, std::abs(b[i] - ref[i]));
    scale = std::max(scale, std::abs(ref[i]));
  }
  if (ea <= 1e-12 * scale) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(ea / eb);
}

Demo conservation_demo(const std::string& entry) {
  Demo d;
  d.entry = entry;
  if (entry == "se2-curve") {
    d.lagrangian = "kappa^2";
    d.init = {{"kappa", 1.0}, {"kappa_s", 0.0}};
    d.note = "elastica: kappa(0) = 1, kappa_s(0) = 0";
  } else if (entry == "sl2-action1") {
    d.lagrangian = "sigma_x^2/2";
    d.init = {{"sigma", 0.0}, {"sigma_x", 1.0}, {"sigma_xx", 0.0}, {"sigma_xxx", 0.0}, {"sigma_xxxx", 1.0}};
    d.note = "sigma(0) = 0, sigma_x(0) = 1, sigma_xx(0) = sigma_xxx(0) = 0; sigma_xxxx(0) = 1 is an implementation choice";
  } else {
    return reconstruction_demo(entry);
  }
  d.note += "; curve starts at the identity frame";
  return d;
}

Demo reconstruction_demo(const std::string& entry) {
  Demo d;
  d.entry = entry;
  d.span = 2.0;
  if (entry == "se2-curve") {
    d = conservation_demo(entry);
    return d;
  }
  if (entry == "sl2-action1") {
    d.lagrangian = "sigma_x^2/2";
    d.init = {{"sigma", -1.0}, {"sigma_x", 1.0}, {"sigma_xx", 1.0}, {"sigma_xxx", 0.0}, {"sigma_xxxx", 0.0}};
    d.span = 1.5;
  } else if (entry == "sl2-action2") {
    d.lagrangian = "sigma_s^2/2 + sigma";
    d.init = {{"sigma", 0.5}, {"sigma_s", 0.0}, {"sigma_ss", -0.5}, {"sigma_sss", 0.1}};
  } else if (entry == "sl2-action3") {
    d.lagrangian = "sigma^2/2 + eta^2/2";
    d.init = {{"sigma", 0.5}, {"eta", 0.3}, {"eta_s", 0.0}};
  } else {
    throw std::invalid_argument("no numeric demo for " + entry);
  }
  d.note = "demo data are implementation choices keeping c2 and E^sigma(L) away from zero; curve starts at the identity frame";
  return d;
}

std::map<Symbol, double> resolve_init(const ExplicitSystem& sys, const std::map<std::string, double>& init) {
  std::map<Symbol, double> out = sys.curve_start;
  for (const auto& s : sys.state) {
    auto it = init.find(s.text());
    if (it != init.end()) out[s] = it->second;
  }
  for (const auto& [k, v] : init)
    if (std::none_of(sys.state.begin(), sys.state.end(), [&](const Symbol& s) { return s.text() == k; }))
      throw MissingVariable("initial value for " + k + " does not match the state");
  return out;
}

void write_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::pair<std::string, Expr>>& extra) {
  std::vector<std::vector<double>> cols;
  os << "s";
  for (const auto& c : traj.columns) os << ',' << c.text();
  for (const auto& [name, e] : extra) {
    os << ',' << name;
    cols.push_back(traj.evaluate(e));
  }
  os << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << fmt::format("{:.17g}", traj.s[i]);
    for (double x : traj.values[i]) os << fmt::format(",{:.17g}", x);
    for (const auto& c : cols) os << fmt::format(",{:.17g}", c[i]);
    os << '\n';
  }
}

nlohmann::ordered_json to_json(const Trajectory& traj, std::size_t stride) {
  nlohmann::ordered_json j;
  j["entry"] = traj.entry;
  j["lagrangian"] = traj.lagrangian;
  j["h"] = traj.h;
  j["nodes"] = traj.size();
  j["constants"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : traj.constants) j["constants"][k] = v;
  j["notes"] = traj.notes;
  auto cols = nlohmann::ordered_json::array({"s"});
  for (const auto& c : traj.columns) cols.push_back(c.text());
  j["columns"] = cols;
  auto rows = nlohmann::ordered_json::array();
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t i = 0; i < traj.size(); i += stride) {
    auto row = nlohmann::ordered_json::array({traj.s[i]});
    for (double x : traj.values[i]) row.push_back(x);
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j;
}

nlohmann::ordered_json to_json(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["pass"] = r.pass();
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json x;
    x["name"] = c.name;
    x["residual"] = std::isfinite(c.residual) ? nlohmann::ordered_json(c.residual) : nlohmann::ordered_json("inf");
    x["tolerance"] = c.tolerance;
    x["pass"] = c.pass;
    x["samples"] = c.samples;
    if (c.informational) x["informational"] = true;
    if (!c.note.empty()) x["note"] = c.note;
    checks.push_back(x);
  }
  j["checks"] = checks;
  return j;
}

}  // namespace mframe::numlab
