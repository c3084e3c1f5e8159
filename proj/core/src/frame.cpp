#include "mframe/frame.hpp"

#include <cmath>
#include <numbers>

#include "mframe/numeric.hpp"

namespace mframe::frame {

using jetcalc::total_derivative;
using symexpr::Bindings;
using symexpr::Point;
using symexpr::subst;

namespace {

int jet_order(const Expr& e, const GroupActionSpec& s) {
  int n = 0;
  for (const auto& d : s.dependent) n = std::max(n, symexpr::max_order(e, SymbolKind::Jet, d));
  return n;
}

std::size_t dependent_index(const GroupActionSpec& s, const std::string& name) {
  for (std::size_t a = 0; a < s.dependent.size(); ++a)
    if (s.dependent[a] == name) return a;
  throw FrameError("unknown dependent variable " + name);
}

std::vector<Var> plus_tau(std::vector<Var> v) {
  v.push_back(Var::tau);
  return v;
}

Var last_var(const MultiIndex& k) { return k.sequence().back(); }

bool positive_at(const MovingFrame& f, const Point& p) {
  for (const auto& e : f.positive) {
    double v = symexpr::eval_num(e, p);
    if (!(v > 0) || !std::isfinite(v)) return false;
  }
  return true;
}

double wrap_angle(double d) { return std::remainder(d, 2 * std::numbers::pi); }

}  // namespace

Bindings MovingFrame::bindings() const {
  Bindings b;
  for (const auto& [p, e] : rho) b[spec->param(p)] = e;
  return b;
}

// ---- Invariantizer ----

Invariantizer::Invariantizer(const MovingFrame& f, JetSpace js) : spec_(f.spec), js_(std::move(js)), rho_(f.bindings()) {
  for (auto v : spec_->independent) {
    Symbol x = jetcalc::independent_symbol(v);
    auto it = spec_->action.find(x);
    if (it != spec_->action.end() && it->second != Expr(x))
      throw FrameError(spec_->name + ": invariantization requires an action fixing " + x.text());
  }
}

const Expr& Invariantizer::transformed(const Symbol& jet) {
  if (auto it = transformed_.find(jet); it != transformed_.end()) return it->second;
  Expr out;
  if (jet.deriv.empty()) {
    auto it = spec_->action.find(jet);
    if (it == spec_->action.end()) throw FrameError("no action on " + jet.text());
    out = it->second;
  } else {
    Var v = last_var(jet.deriv);
    Expr parent = transformed(jet.with_deriv(*jet.deriv.minus(v)));
    out = total_derivative(parent, v, js_);
  }
  return transformed_.emplace(jet, std::move(out)).first->second;
}

const Expr& Invariantizer::invariant(const Symbol& jet) {
  if (auto it = invariant_.find(jet); it != invariant_.end()) return it->second;
  Expr out = subst(transformed(jet), rho_);
  return invariant_.emplace(jet, std::move(out)).first->second;
}

Expr Invariantizer::operator()(const Expr& e) {
  Bindings b;
  for (const auto& s : e.free_symbols())
    if (s.kind == SymbolKind::Jet) b[s] = invariant(s);
  return subst(e, b);
}

Expr invariantize(const Expr& e, const MovingFrame& f) {
  bool tau = false;
  for (const auto& s : e.free_symbols())
    if (s.kind == SymbolKind::Jet && s.deriv.count(Var::tau) > 0) tau = true;
  const auto& spec = *f.spec;
  JetSpace js = spec.jet_space(std::max(jet_order(e, spec), f.order) + 1);
  if (tau) js.independent = plus_tau(js.independent);
  Invariantizer inv(f, js);
  return inv(e);
}

// ---- frame verification ----

Point sample_domain(const MovingFrame& f, const std::vector<Symbol>& coords, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.3, 1.5);
  std::bernoulli_distribution sign(0.5);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Point p;
    for (const auto& c : coords) p[c] = sign(rng) ? mag(rng) : -mag(rng);
    if (positive_at(f, p)) return p;
  }
  throw FrameError(f.spec->name + ": no sample point inside the frame domain after 1000 draws");
}

EquivarianceReport check_equivariance(const MovingFrame& f, int samples, std::uint64_t seed, int invariant_order) {
  const auto& spec = *f.spec;
  int n = invariant_order;
  if (n < 0)
    for (const auto& g : spec.generators) n = std::max(n, g.coordinate.deriv.order());
  int zorder = std::max(n, f.order);
  JetSpace js = spec.jet_space(zorder + 1);
  Invariantizer inv(f, js);
  std::vector<Symbol> coords;
  for (std::size_t a = 0; a < spec.dependent.size(); ++a)
    for (const auto& k : js.multi_indices(zorder)) coords.push_back(spec.dependent_symbol(a, k));
  std::vector<Symbol> invariant_coords;
  for (const auto& c : coords)
    if (c.deriv.order() <= n) invariant_coords.push_back(c);
  for (const auto& c : coords) inv.transformed(c);

  auto is_angle = [&](const std::string& p) {
    return std::find(spec.angle_parameters.begin(), spec.angle_parameters.end(), p) != spec.angle_parameters.end();
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> near(-0.4, 0.4);
  EquivarianceReport rep;
  for (int k = 0; k < samples; ++k) {
    Point z, zt, g;
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      z = sample_domain(f, coords, rng);
      g.clear();
      for (const auto& p : spec.parameters) g[spec.param(p)] = spec.identity.at(p).get_d() + near(rng);
      Point zg = z;
      zg.insert(g.begin(), g.end());
      zt.clear();
      ok = true;
      for (const auto& c : coords) {
        double v = symexpr::eval_num(inv.transformed(c), zg);
        if (!std::isfinite(v)) ok = false;
        zt[c] = v;
      }
      ok = ok && positive_at(f, zt);
    }
    if (!ok) throw FrameError(spec.name + ": cannot sample transformed points inside the frame domain");
    Point prod;
    for (const auto& p : spec.parameters) {
      prod[spec.param(p)] = symexpr::eval_num(f.rho.at(p), z);
      prod[spec.param2(p)] = symexpr::eval_num(spec.inverse.at(p), g);
    }
    for (const auto& p : spec.parameters) {
      double lhs = symexpr::eval_num(f.rho.at(p), zt);
      double rhs = symexpr::eval_num(spec.product.at(p), prod);
      double d = is_angle(p) ? wrap_angle(lhs - rhs) : lhs - rhs;
      rep.frame_residual = std::max(rep.frame_residual, std::abs(d) / std::max(1.0, std::abs(rhs)));
    }
    for (const auto& c : invariant_coords) {
      double a = symexpr::eval_num(inv.invariant(c), z);
      double b = symexpr::eval_num(inv.invariant(c), zt);
      rep.invariant_residual = std::max(rep.invariant_residual, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
    // a point on the cross-section
    Point zc;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      zc = sample_domain(f, coords, rng);
      for (const auto& nm : spec.normalizations) zc[nm.coordinate] = nm.value.get_d();
      if (positive_at(f, zc)) break;
    }
    for (const auto& p : spec.parameters) {
      double v = symexpr::eval_num(f.rho.at(p), zc);
      double d = v - spec.identity.at(p).get_d();
      if (is_angle(p)) d = wrap_angle(d);
      rep.cross_section_residual = std::max(rep.cross_section_residual, std::abs(d));
    }
    ++rep.samples;
  }
  return rep;
}

MovingFrame solve_frame(const GroupActionSpec& spec, int samples, std::uint64_t seed) {
  MovingFrame f;
  f.spec = &spec;
  f.rho = spec.frame;
  f.positive = spec.positive;
  for (const auto& [p, e] : f.rho) f.order = std::max(f.order, jet_order(e, spec));
  int n = f.order;
  for (const auto& nm : spec.normalizations) n = std::max(n, nm.coordinate.deriv.order());
  Invariantizer inv(f, spec.jet_space(n + 1));
  for (const auto& nm : spec.normalizations) {
    auto v = symexpr::zero_test(inv.invariant(nm.coordinate) - Expr(nm.value));
    if (!v.zero)
      throw FrameError(spec.name + ": normalization of " + nm.coordinate.text() + " fails at the frame");
  }
  auto rep = check_equivariance(f, samples, seed);
  if (rep.frame_residual > 1e-9)
    throw FrameError(spec.name + ": frame is not equivariant (residual " + std::to_string(rep.frame_residual) + ")");
  if (rep.invariant_residual > 1e-9)
    throw FrameError(spec.name + ": invariants change under the action (residual " +
                     std::to_string(rep.invariant_residual) + ")");
  if (rep.cross_section_residual > 1e-9)
    throw FrameError(spec.name + ": frame is not the identity on the cross-section");
  return f;
}

// ---- linear forms ----

std::map<Symbol, Expr> linear_form(const Expr& e, SymbolKind kind) {
  std::map<Symbol, Expr> out;
  Expr rest = e;
  for (const auto& s : e.free_symbols()) {
    if (s.kind != kind) continue;
    std::map<int, Expr> c;
    try {
      c = symexpr::coefficients(e, s);
    } catch (const std::exception&) {
      throw CollectionFailure("expression is not polynomial in " + s.text());
    }
    for (const auto& [k, v] : c)
      if (k > 1) throw CollectionFailure("expression is nonlinear in " + s.text());
    if (auto it = c.find(1); it != c.end()) {
      if (it->second.depends_on_kind(kind)) throw CollectionFailure("coefficient of " + s.text() + " is not free");
      rest -= it->second * Expr(s);
      out.emplace(s, it->second);
    }
  }
  if (!rest.is_zero() && !symexpr::is_zero(rest)) throw CollectionFailure("expression has a term free of the basis");
  return out;
}

// ---- invariant table ----

InvariantTable::InvariantTable(const MovingFrame& f, int order, bool tau)
    : frame_(f),
      order_(order),
      with_tau_(tau),
      jets_(f.spec->jet_space(order + f.order + 2)),
      formal_(f.spec->generator_space(order + 4)),
      variations_(formal_),
      inv_(f, JetSpace()) {
  const auto& s = spec();
  if (tau) jets_.independent = plus_tau(jets_.independent);
  for (const auto& d : s.dependent) variations_.dependent.push_back({SymbolKind::Variation, d});
  inv_ = Invariantizer(frame_, jets_);
  build();
}

InvariantTable build_invariant_table(const MovingFrame& f, int order, bool with_tau) {
  return InvariantTable(f, order, with_tau);
}

Symbol InvariantTable::tau_symbol(std::size_t alpha, const MultiIndex& j) const {
  return Symbol(SymbolKind::TauInvariant, spec().dependent.at(alpha), j);
}

Symbol InvariantTable::variation_symbol(std::size_t alpha, const MultiIndex& j) const {
  return Symbol(SymbolKind::Variation, spec().dependent.at(alpha), j);
}

const Expr& InvariantTable::explicit_form(const Symbol& jet) const {
  if (!contains(jet)) throw FrameError(jet.text() + " is outside the invariant table");
  return inv_.invariant(jet);
}

const Expr& InvariantTable::generator_form(const Symbol& jet) const {
  auto it = generator_.find(jet);
  if (it == generator_.end()) throw FrameError(jet.text() + " is outside the invariant table");
  return it->second;
}

Expr InvariantTable::replace(const Expr& e) const {
  Bindings b;
  for (const auto& s : e.free_symbols()) {
    if (s.kind != SymbolKind::Jet) continue;
    int nt = s.deriv.count(Var::tau);
    if (nt == 1) {
      b[s] = Expr(Symbol(SymbolKind::TauInvariant, s.name, *s.deriv.minus(Var::tau)));
    } else if (nt > 1) {
      throw FrameError("second variation " + s.text() + " is not supported");
    } else {
      b[s] = generator_form(s);
    }
  }
  return subst(e, b);
}

void InvariantTable::build() {
  const auto& s = spec();
  std::map<Symbol, Expr> fixed;
  for (const auto& nm : s.normalizations) fixed[nm.coordinate] = Expr(nm.value);
  for (const auto& g : s.generators) fixed[g.coordinate] = Expr(Symbol(SymbolKind::Generator, g.name));
  JetSpace base = s.jet_space(order_);

  for (int n = 0; n <= order_; ++n) {
    std::vector<Symbol> pending;
    for (std::size_t a = 0; a < s.dependent.size(); ++a)
      for (const auto& k : base.multi_indices_of_order(n)) {
        Symbol sym = s.dependent_symbol(a, k);
        coords_.push_back(sym);
        if (auto it = fixed.find(sym); it != fixed.end())
          generator_[sym] = it->second;
        else
          pending.push_back(sym);
      }
    auto placeholder = [](const Symbol& j) { return Symbol(SymbolKind::Invariant, j.name, j.deriv); };
    // replacement with the pending jets of this order as placeholders
    auto replace_partial = [&](const Expr& e) -> std::optional<Expr> {
      Bindings b;
      for (const auto& sym : e.free_symbols()) {
        if (sym.kind != SymbolKind::Jet) continue;
        if (auto it = generator_.find(sym); it != generator_.end()) {
          b[sym] = it->second;
        } else if (std::find(pending.begin(), pending.end(), sym) != pending.end()) {
          b[sym] = Expr(placeholder(sym));
        } else {
          return std::nullopt;
        }
      }
      return subst(e, b);
    };
    auto solve = [&](const Symbol& target) -> std::optional<Expr> {
      const Symbol ph = placeholder(target);
      for (auto v : s.independent) {
        auto kp = target.deriv.minus(v);
        if (!kp) continue;
        Symbol parent = target.with_deriv(*kp);
        auto pg = generator_.find(parent);
        if (pg == generator_.end()) continue;
        auto lhs = replace_partial(total_derivative(inv_.invariant(parent), v, jets_));
        if (!lhs || !lhs->depends_on(ph)) continue;
        bool other = false;
        for (const auto& sym : lhs->free_symbols())
          if (sym.kind == SymbolKind::Invariant && sym != ph) other = true;
        if (other) continue;
        std::map<int, Expr> c;
        try {
          c = symexpr::coefficients(*lhs, ph);
        } catch (const std::exception&) {
          throw NonlinearTopOrder(target.text() + " does not enter its recurrence polynomially");
        }
        if (c.size() > 2 || !c.count(1) || c.rbegin()->first != 1)
          throw NonlinearTopOrder(target.text() + " does not enter its recurrence linearly");
        Expr rhs = total_derivative(pg->second, v, formal_);
        Expr c0 = c.count(0) ? c.at(0) : Expr();
        return (rhs - c0) / c.at(1);
      }
      return std::nullopt;
    };
    while (!pending.empty()) {
      bool progress = false;
      for (std::size_t i = 0; i < pending.size();) {
        if (auto g = solve(pending[i])) {
          generator_[pending[i]] = *g;
          pending.erase(pending.begin() + static_cast<long>(i));
          progress = true;
        } else {
          ++i;
        }
      }
      if (!progress) throw FrameError(s.name + ": cannot express " + pending.front().text() + " in the generators");
    }
  }

  for (const auto& g : s.generators) {
    for (auto v : s.independent) {
      if (g.coordinate.deriv.order() + 1 > order_ || frame_.order + 1 > order_) continue;
      Symbol lhs(SymbolKind::Generator, g.name, MultiIndex(v));
      Expr rhs = replace(total_derivative(inv_.invariant(g.coordinate), v, jets_));
      if (rhs == Expr(lhs)) continue;
      if (rhs.depends_on(lhs)) throw FrameError(s.name + ": implicit relation for " + lhs.text());
      relations_[lhs] = rhs;
    }
  }
}

Expr InvariantTable::definition(const Symbol& g) const {
  if (auto it = definitions_.find(g); it != definitions_.end()) return it->second;
  Expr out;
  if (g.deriv.empty()) {
    const auto& s = spec();
    auto it = std::find_if(s.generators.begin(), s.generators.end(), [&](const auto& x) { return x.name == g.name; });
    if (it == s.generators.end()) throw FrameError("unknown generator " + g.name);
    out = inv_.invariant(it->coordinate);
  } else {
    Var v = last_var(g.deriv);
    out = total_derivative(definition(g.with_deriv(*g.deriv.minus(v))), v, jets_);
  }
  definitions_.emplace(g, out);
  return out;
}

Expr InvariantTable::to_jets(const Expr& e) const {
  Bindings b;
  for (const auto& s : e.free_symbols()) {
    switch (s.kind) {
      case SymbolKind::Generator:
        b[s] = definition(s);
        break;
      case SymbolKind::TauInvariant:
        b[s] = inv_.invariant(Symbol(SymbolKind::Jet, s.name, s.deriv.plus(Var::tau)));
        break;
      case SymbolKind::Variation:
        b[s] = variation_explicit(dependent_index(spec(), s.name), s.deriv);
        break;
      default:
        break;
    }
  }
  return subst(e, b);
}

Expr InvariantTable::reduce(const Expr& e0) const {
  Expr e = e0;
  for (int it = 0; it < 32; ++it) {
    Bindings b;
    for (const auto& s : e.free_symbols()) {
      if (s.kind != SymbolKind::Generator) continue;
      for (const auto& [r, rhs] : relations_)
        if (r.name == s.name && r.deriv.divides(s.deriv)) {
          b[s] = total_derivative(rhs, *(s.deriv - r.deriv), variations_);
          break;
        }
    }
    if (b.empty()) return e;
    e = subst(e, b);
  }
  throw FrameError("relation elimination does not terminate");
}

Expr InvariantTable::variation_explicit(std::size_t alpha, const MultiIndex& j) const {
  if (!with_tau_) throw FrameError("invariant table was built without tau");
  auto key = std::make_pair(alpha, j);
  if (auto it = var_explicit_.find(key); it != var_explicit_.end()) return it->second;
  Expr out;
  if (j.empty()) {
    out = inv_.invariant(spec().dependent_symbol(alpha, MultiIndex(Var::tau)));
  } else {
    Var v = last_var(j);
    out = total_derivative(variation_explicit(alpha, *j.minus(v)), v, jets_);
  }
  var_explicit_.emplace(key, out);
  return out;
}

Expr InvariantTable::variation(std::size_t alpha, const MultiIndex& j) const {
  auto key = std::make_pair(alpha, j);
  if (auto it = var_form_.find(key); it != var_form_.end()) return it->second;
  Expr out = replace(variation_explicit(alpha, j));
  var_form_.emplace(key, out);
  return out;
}

void InvariantTable::extend_inverse(int n) const {
  const auto& s = spec();
  JetSpace base = s.jet_space(n);
  for (int m = inverse_order_ + 1; m <= n; ++m) {
    std::vector<std::pair<std::size_t, MultiIndex>> unknowns;
    for (std::size_t a = 0; a < s.dependent.size(); ++a)
      for (const auto& k : base.multi_indices_of_order(m)) unknowns.emplace_back(a, k);
    std::map<Symbol, std::size_t> index;
    for (std::size_t i = 0; i < unknowns.size(); ++i) index[tau_symbol(unknowns[i].first, unknowns[i].second)] = i;
    const std::size_t q = unknowns.size();
    liegroup::Matrix M(q, std::vector<Expr>(q));
    std::vector<Expr> rhs(q);
    for (std::size_t r = 0; r < q; ++r) {
      const auto& [a, j] = unknowns[r];
      Expr lower;
      for (const auto& [sym, c] : linear_form(variation(a, j), SymbolKind::TauInvariant)) {
        if (auto it = index.find(sym); it != index.end()) {
          M[r][it->second] = c;
        } else if (sym.deriv.order() < m) {
          lower += c * tau_form_.at({dependent_index(s, sym.name), sym.deriv});
        } else {
          throw CollectionFailure("variation " + variation_symbol(a, j).text() + " involves " + sym.text());
        }
      }
      rhs[r] = Expr(variation_symbol(a, j)) - lower;
    }
    liegroup::Matrix Minv;
    try {
      Minv = liegroup::inverse(M);
    } catch (const liegroup::RankDeficient&) {
      throw CollectionFailure("variations of order " + std::to_string(m) + " do not determine the tau invariants");
    }
    for (std::size_t k = 0; k < q; ++k) {
      Expr e;
      for (std::size_t r = 0; r < q; ++r)
        if (!Minv[k][r].is_zero()) e += Minv[k][r] * rhs[r];
      tau_form_[unknowns[k]] = e;
    }
  }
  inverse_order_ = std::max(inverse_order_, n);
}

Expr InvariantTable::tau_invariant(std::size_t alpha, const MultiIndex& j) const {
  if (j.order() > inverse_order_) extend_inverse(j.order());
  return tau_form_.at({alpha, j});
}

void InvariantTable::verify() const {
  for (const auto& c : coords_) {
    auto v = symexpr::zero_test(to_jets(generator_form(c)) - explicit_form(c));
    if (!v.zero) throw FrameError(spec().name + ": invariant table entry " + c.text() + " is inconsistent");
  }
  for (const auto& [g, rhs] : relations_) {
    auto v = symexpr::zero_test(to_jets(rhs) - definition(g));
    if (!v.zero) throw FrameError(spec().name + ": relation for " + g.text() + " does not hold");
  }
}

Expr rewrite_in_invariants(const Expr& e, const InvariantTable& t) {
  Expr r = t.replace(e);
  auto v = symexpr::zero_test(t.to_jets(r) - e);
  if (!v.zero) throw NotInvariant("expression is not invariant: " + e.str());
  return r;
}

// ---- syzygies ----

SyzygyOperators syzygy_operators(const InvariantTable& t) {
  const auto& s = t.spec();
  SyzygyOperators out;
  out.space = t.variation_space();
  out.dependents = s.dependent;
  for (const auto& g : s.generators) {
    out.generators.push_back(g.name);
    Expr dt = t.replace(total_derivative(t.explicit_form(g.coordinate), Var::tau, t.jets()));
    Expr acc;
    for (const auto& [sym, c] : linear_form(dt, SymbolKind::TauInvariant))
      acc += c * t.tau_invariant(dependent_index(s, sym.name), sym.deriv);
    std::vector<LinDiffOp> row(s.dependent.size());
    for (const auto& [sym, c] : linear_form(acc, SymbolKind::Variation))
      row[dependent_index(s, sym.name)].add(sym.deriv, c);
    out.H.push_back(std::move(row));
  }
  return out;
}

void verify_syzygies(const SyzygyOperators& h, const InvariantTable& t) {
  const auto& s = t.spec();
  for (std::size_t j = 0; j < h.generators.size(); ++j) {
    Expr lhs = total_derivative(t.explicit_form(s.generators[j].coordinate), Var::tau, t.jets());
    Expr rhs;
    for (std::size_t a = 0; a < h.dependents.size(); ++a)
      for (const auto& [k, c] : h.at(j, a).terms()) rhs += t.to_jets(c) * t.variation_explicit(a, k);
    auto v = symexpr::zero_test(lhs - rhs);
    if (!v.zero) throw FrameError(s.name + ": syzygy for " + h.generators[j] + " does not hold");
  }
}

liegroup::Matrix adjoint_inverse_at_frame(const MovingFrame& f, const liegroup::Matrix& ad) {
  const auto& s = *f.spec;
  Bindings rho = f.bindings();
  std::map<std::string, Expr> ginv;
  for (const auto& p : s.parameters) ginv[p] = subst(s.inverse.at(p), rho);
  return liegroup::adjoint_at(s, ad, ginv);
}

liegroup::Matrix invariantized_infinitesimals(const InvariantTable& t, std::size_t alpha,
                                              const std::vector<MultiIndex>& columns) {
  std::vector<Symbol> coords;
  for (const auto& k : columns) coords.push_back(t.spec().dependent_symbol(alpha, k));
  auto m = liegroup::infinitesimal_matrix(t.spec(), coords);
  return liegroup::map(m, [&](const Expr& e) { return t.replace(e); });
}

}  // namespace mframe::frame
