#include "mframe/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "mframe/format.hpp"

namespace mframe::report {

using liegroup::GroupActionSpec;
using symexpr::Expr;
using symexpr::Symbol;
using symexpr::SymbolKind;

namespace {

const symexpr::SymbolRegistry* reg(const GroupActionSpec* s) { return s ? &s->registry : nullptr; }

json expr_json(const Expr& e, const GroupActionSpec* s) {
  json j;
  j["text"] = symexpr::to_text(e);
  j["latex"] = symexpr::to_latex(e, reg(s));
  return j;
}

json equation_json(const varcalc::Equation& eq, const GroupActionSpec* s) {
  json j;
  if (eq.coordinate) j["coordinate"] = eq.coordinate->text();
  j["lhs"] = expr_json(eq.lhs, s);
  j["rhs"] = expr_json(eq.rhs, s);
  return j;
}

json matrix_json(const liegroup::Matrix& m, const GroupActionSpec* s) {
  json rows = json::array();
  for (const auto& r : m) {
    json row = json::array();
    for (const auto& e : r) row.push_back(expr_json(e, s));
    rows.push_back(row);
  }
  return rows;
}

std::string latex_matrix(const liegroup::Matrix& m, const GroupActionSpec* s) {
  std::string out = "\\begin{pmatrix}\n";
  for (const auto& r : m) {
    std::vector<std::string> cells;
    for (const auto& e : r) cells.push_back(symexpr::to_latex(e, reg(s)));
    out += "  " + fmt::format("{}", fmt::join(cells, " & ")) + " \\\\\n";
  }
  return out + "\\end{pmatrix}";
}

std::string latex_vector(const std::vector<Expr>& v, const GroupActionSpec* s) {
  liegroup::Matrix m;
  for (const auto& e : v) m.push_back({e});
  return latex_matrix(m, s);
}

std::string text_vector(const std::vector<Expr>& v) {
  std::vector<std::string> parts;
  for (const auto& e : v) parts.push_back(symexpr::to_text(e));
  return "(" + fmt::format("{}", fmt::join(parts, ", ")) + ")";
}

std::string text_matrix(const liegroup::Matrix& m, const std::string& indent) {
  std::string out;
  for (const auto& r : m) out += indent + text_vector(r) + "\n";
  return out;
}

std::string rational_matrix_text(const liegroup::RationalMatrix& m) {
  std::vector<std::string> rows;
  for (const auto& r : m) {
    std::vector<std::string> cells;
    for (const auto& q : r) cells.push_back(symexpr::rational_text(q));
    rows.push_back("[" + fmt::format("{}", fmt::join(cells, ", ")) + "]");
  }
  return "[" + fmt::format("{}", fmt::join(rows, ", ")) + "]";
}

std::string gen_latex(const GroupActionSpec& s, const std::string& name) {
  const auto* l = s.registry.latex_of(name);
  return l ? *l : name;
}

std::string euler_latex(const GroupActionSpec& s, const std::string& name) { return "\\mathsf{E}^{" + gen_latex(s, name) + "}(L)"; }

std::string var_list(const std::vector<symexpr::Var>& vs) {
  std::vector<std::string> out;
  for (auto v : vs) out.push_back(symexpr::var_name(v));
  return fmt::format("{}", fmt::join(out, ", "));
}

json spec_header(const GroupActionSpec& s, const std::string& command) {
  json j;
  j["schema"] = kSchema;
  j["command"] = command;
  j["entry"] = s.name;
  return j;
}

std::string latex_header(const std::string& title) { return "% " + title + "\n"; }

// Parametrisation constraint sqrt(P) = 1 in jets, P quadratic in its leading atom.
struct RadicalConstraint {
  symexpr::Atom radical;
  symexpr::Atom lead;
  symexpr::Poly rest;  // P - lead^2

  symexpr::Poly reduce(const symexpr::Poly& p) const {
    symexpr::Poly out;
    for (const auto& [k, c] : p.substitute(radical, symexpr::Poly(1)).coefficients_in(lead)) {
      symexpr::Poly t = c * (symexpr::Poly(1) - rest).pow(static_cast<unsigned>(k / 2));
      out += k % 2 ? t * symexpr::Poly(lead) : t;
    }
    return out;
  }
  Expr operator()(const Expr& e) const { return Expr::fraction(reduce(e.num()), reduce(e.den())); }
};

std::optional<RadicalConstraint> radical_constraint(const varcalc::Context& ctx) {
  const auto& s = *ctx.spec;
  if (!s.constraint || s.constraint->kind != "parametrization") return std::nullopt;
  Expr c = ctx.table->to_jets(s.constraint->expr);
  if (!c.is_polynomial()) return std::nullopt;
  for (const auto& a : c.num().atoms()) {
    if (a->kind != symexpr::AtomKind::Radical) continue;
    if (c.num() != symexpr::Poly(a) - symexpr::Poly(1)) continue;
    const auto& p = *a->radicand;
    for (const auto& b : p.atoms()) {
      if (p.degree_in(b) != 2) continue;
      auto co = p.coefficients_in(b);
      if (co.size() != 2 || !co.count(0) || co.at(2) != symexpr::Poly(1)) continue;
      return RadicalConstraint{a, b, co.at(0)};
    }
  }
  return std::nullopt;
}

}  // namespace

Derivation derive(const varcalc::Context& ctx, const std::string& lagrangian) {
  Derivation d;
  d.spec = ctx.spec;
  d.source = lagrangian;
  d.lagrangian = varcalc::parse_lagrangian(ctx, lagrangian);
  d.el = varcalc::invariant_el(ctx, d.lagrangian);
  d.eliminated = varcalc::eliminate_multiplier(ctx, d.el, d.lagrangian);
  for (const auto& r : varcalc::el_oracle_residuals(ctx, d.lagrangian, d.el)) d.oracle.push_back(symexpr::zero_test(r).zero);
  for (std::size_t a = 0; a < d.oracle.size(); ++a)
    if (!d.oracle[a])
      throw varcalc::VerificationFailure(fmt::format("{}: invariant Euler-Lagrange equation for {} disagrees with the jet-coordinate Euler operator",
                                                     ctx.spec->name, d.el.dependents[a]));
  if (d.lagrangian.multiplier && !d.eliminated.multiplier_value) {
    bool free = true;
    for (const auto& e : d.eliminated.equations) free = free && !e.depends_on_kind(symexpr::SymbolKind::Multiplier);
    auto bare = varcalc::invariant_el(ctx, varcalc::parse_lagrangian(ctx, lagrangian, false));
    if (free && bare.equations == d.eliminated.equations) {
      d.el.generator_euler = bare.generator_euler;
      d.multiplier_cancelled = true;
    }
  }
  d.boundary = varcalc::boundary_coeffs(ctx, d.lagrangian);
  return d;
}

Laws laws(const varcalc::Context& ctx, const std::string& lagrangian) {
  Laws l;
  l.spec = ctx.spec;
  l.source = lagrangian;
  auto L = varcalc::parse_lagrangian(ctx, lagrangian);
  l.laws = varcalc::noether_laws(ctx, L);
  if (auto rc = radical_constraint(ctx)) {
    l.constraint_form = symexpr::to_text(ctx.table->to_jets(ctx.spec->constraint->expr)) + " = 0";
    l.ad_inverse_on_constraint = liegroup::map(l.laws.ad_inverse, *rc);
    if (ctx.spec->independent.size() == 1)
      for (const auto& f : l.laws.first_integrals()) l.first_integrals_on_constraint.push_back((*rc)(f));
  }
  if (ctx.spec->independent.size() != 1) {
    l.note = "the Killing first integral needs one independent variable";
  } else {
    try {
      l.killing = varcalc::killing_first_integral(l.laws);
      l.reduced = varcalc::reduced_system(ctx, l.laws);
    } catch (const varcalc::SingularKillingForm& e) {
      l.note = e.what();
    }
  }
  return l;
}

json catalog_json(const std::string& dir) {
  json j;
  j["schema"] = kSchema;
  j["command"] = "catalog";
  json entries = json::array();
  for (const auto& n : liegroup::catalog_names(dir)) {
    const auto& s = liegroup::catalog(n, dir);
    json e;
    e["name"] = s.name;
    e["description"] = s.description;
    e["independent"] = json::array();
    for (auto v : s.independent) e["independent"].push_back(symexpr::var_name(v));
    e["dependent"] = s.dependent;
    e["parameters"] = s.parameters;
    e["dimension"] = s.dim();
    e["semisimple"] = s.semisimple;
    json gens = json::array();
    for (const auto& g : s.generators) gens.push_back(json{{"name", g.name}, {"latex", g.latex}, {"coordinate", g.coordinate.text()}});
    e["generators"] = gens;
    json norms = json::array();
    for (const auto& nm : s.normalizations)
      norms.push_back(json{{"coordinate", nm.coordinate.text()}, {"value", symexpr::rational_text(nm.value)}});
    e["normalizations"] = norms;
    if (s.constraint) e["constraint"] = json{{"kind", s.constraint->kind}, {"expr", expr_json(s.constraint->expr, &s)}};
    entries.push_back(e);
  }
  j["entries"] = entries;
  return j;
}

std::string catalog_text(const std::string& dir) {
  std::string out;
  for (const auto& n : liegroup::catalog_names(dir)) {
    const auto& s = liegroup::catalog(n, dir);
    std::vector<std::string> gens, norms;
    for (const auto& g : s.generators) gens.push_back(g.name + " = I(" + g.coordinate.text() + ")");
    for (const auto& nm : s.normalizations) norms.push_back(nm.coordinate.text() + " = " + symexpr::rational_text(nm.value));
    out += fmt::format("{}: {}\n", s.name, s.description);
    out += fmt::format("  independent: {}; dependent: {}; dimension {}{}\n", var_list(s.independent), fmt::join(s.dependent, ", "),
                       s.dim(), s.semisimple ? ", semisimple" : "");
    out += fmt::format("  generators: {}\n", fmt::join(gens, ", "));
    out += fmt::format("  normalizations: {}\n", fmt::join(norms, ", "));
    if (s.constraint) out += fmt::format("  constraint ({}): {} = 0\n", s.constraint->kind, symexpr::to_text(s.constraint->expr));
  }
  return out;
}

std::string catalog_latex(const std::string& dir) {
  std::string out = latex_header("catalog");
  out += "\\begin{tabular}{llll}\n";
  out += "entry & generators & normalizations & constraint \\\\\n\\hline\n";
  for (const auto& n : liegroup::catalog_names(dir)) {
    const auto& s = liegroup::catalog(n, dir);
    std::vector<std::string> gens, norms;
    for (const auto& g : s.generators) gens.push_back("$" + g.latex + " = I(" + g.coordinate.latex() + ")$");
    for (const auto& nm : s.normalizations) norms.push_back("$" + nm.coordinate.latex() + " = " + symexpr::rational_text(nm.value) + "$");
    std::string c = s.constraint ? "$" + symexpr::to_latex(s.constraint->expr, &s.registry) + " = 0$" : "";
    out += fmt::format("\\texttt{{{}}} & {} & {} & {} \\\\\n", s.name, fmt::join(gens, ", "), fmt::join(norms, ", "), c);
  }
  return out + "\\end{tabular}\n";
}

json to_json(const Derivation& d) {
  const auto& s = *d.spec;
  json j = spec_header(s, "derive");
  j["lagrangian"] = d.source;
  j["L"] = expr_json(d.lagrangian.L, &s);
  if (d.lagrangian.multiplier && s.constraint) j["constraint"] = json{{"kind", s.constraint->kind}, {"expr", expr_json(d.lagrangian.constraint, &s)}};
  json syz = json::array();
  const auto& ctx = varcalc::context(s);
  for (std::size_t g = 0; g < ctx.syzygies.generators.size(); ++g)
    for (std::size_t a = 0; a < ctx.syzygies.dependents.size(); ++a) {
      const auto& op = ctx.syzygies.at(g, a);
      syz.push_back(json{{"generator", ctx.syzygies.generators[g]},
                         {"dependent", ctx.syzygies.dependents[a]},
                         {"text", op.str()},
                         {"latex", op.latex(&s.registry)}});
    }
  j["syzygies"] = syz;
  json ge = json::array();
  for (std::size_t g = 0; g < d.el.generators.size(); ++g)
    ge.push_back(json{{"generator", d.el.generators[g]}, {"value", expr_json(d.el.generator_euler[g], &s)}});
  j["generator_euler"] = ge;
  if (d.multiplier_cancelled) j["multiplier_cancelled"] = true;
  const bool has_multiplier = d.eliminated.multiplier_value.has_value();
  json el = json::array();
  for (std::size_t a = 0; a < d.eliminated.dependents.size(); ++a) {
    json e;
    e["dependent"] = d.eliminated.dependents[a];
    e["value"] = expr_json(d.eliminated.equations[a], &s);
    if (!has_multiplier) {
      json terms = json::array();
      for (std::size_t g = 0; g < d.el.generators.size(); ++g) {
        auto adj = varcalc::adjoint_op(ctx.syzygies.at(g, a), ctx.space());
        if (adj.is_zero()) continue;
        terms.push_back(json{{"operator", json{{"text", adj.str()}, {"latex", adj.latex(&s.registry)}}},
                             {"argument", d.el.generators[g]}});
      }
      e["operator_form"] = terms;
    }
    e["oracle_agrees"] = static_cast<bool>(d.oracle.at(a));
    el.push_back(e);
  }
  j["euler_lagrange"] = el;
  if (has_multiplier) {
    json m;
    m["symbol"] = d.eliminated.multiplier->text();
    m["value"] = expr_json(*d.eliminated.multiplier_value, &s);
    json raw = json::array();
    for (std::size_t a = 0; a < d.el.dependents.size(); ++a)
      raw.push_back(json{{"dependent", d.el.dependents[a]}, {"value", expr_json(d.el.equations[a], &s)}});
    m["before_elimination"] = raw;
    j["multiplier"] = m;
  }
  json bc = json::array();
  for (std::size_t i = 0; i < d.boundary.C.size(); ++i)
    for (std::size_t a = 0; a < d.boundary.C[i].size(); ++a)
      for (const auto& [k, c] : d.boundary.C[i][a])
        bc.push_back(json{{"independent", symexpr::var_name(d.boundary.independent[i])},
                          {"dependent", d.boundary.dependents[a]},
                          {"index", k.suffix()},
                          {"value", expr_json(c, &s)}});
  j["boundary"] = json{{"multiplier_terms_dropped", d.boundary.multiplier_dropped}, {"coefficients", bc}};
  return j;
}

std::string to_text(const Derivation& d) {
  const auto& s = *d.spec;
  const auto& ctx = varcalc::context(s);
  std::string out = fmt::format("entry {}\nL = {}\n", s.name, symexpr::to_text(d.lagrangian.L));
  out += "syzygies:\n";
  for (std::size_t g = 0; g < ctx.syzygies.generators.size(); ++g)
    for (std::size_t a = 0; a < ctx.syzygies.dependents.size(); ++a)
      out += fmt::format("  D_tau {} = ({}) I({}_tau)\n", ctx.syzygies.generators[g], ctx.syzygies.at(g, a).str(), ctx.syzygies.dependents[a]);
  out += "generator Euler operators:\n";
  for (std::size_t g = 0; g < d.el.generators.size(); ++g)
    out += fmt::format("  E^{}(L) = {}\n", d.el.generators[g], symexpr::to_text(d.el.generator_euler[g]));
  if (d.eliminated.multiplier_value) {
    out += fmt::format("multiplier {} = {}\n", d.eliminated.multiplier->text(), symexpr::to_text(*d.eliminated.multiplier_value));
  }
  out += "Euler-Lagrange equations:\n";
  for (std::size_t a = 0; a < d.eliminated.dependents.size(); ++a)
    out += fmt::format("  E^{}(L) = {} = 0{}\n", d.eliminated.dependents[a], symexpr::to_text(d.eliminated.equations[a]),
                       d.oracle.at(a) ? "" : "  [oracle disagrees]");
  out += "boundary coefficients:\n";
  for (std::size_t i = 0; i < d.boundary.C.size(); ++i)
    for (std::size_t a = 0; a < d.boundary.C[i].size(); ++a)
      for (const auto& [k, c] : d.boundary.C[i][a])
        out += fmt::format("  C^{}_{{{},{}}} = {}\n", d.boundary.dependents[a], symexpr::var_name(d.boundary.independent[i]),
                           k.empty() ? "0" : k.suffix(), symexpr::to_text(c));
  return out;
}

std::string to_latex(const Derivation& d) {
  const auto& s = *d.spec;
  const auto& ctx = varcalc::context(s);
  std::string out = latex_header("derivation for " + s.name);
  out += "\\begin{align*}\n";
  out += "L &= " + symexpr::to_latex(d.lagrangian.L, &s.registry) + " \\\\\n";
  for (std::size_t g = 0; g < ctx.syzygies.generators.size(); ++g)
    for (std::size_t a = 0; a < ctx.syzygies.dependents.size(); ++a)
      out += fmt::format("\\mathcal{{D}}_\\tau {} &= \\left({}\\right) I^{{{}}}_\\tau \\\\\n", gen_latex(s, ctx.syzygies.generators[g]),
                         ctx.syzygies.at(g, a).latex(&s.registry), ctx.syzygies.dependents[a]);
  for (std::size_t g = 0; g < d.el.generators.size(); ++g)
    out += euler_latex(s, d.el.generators[g]) + " &= " + symexpr::to_latex(d.el.generator_euler[g], &s.registry) + " \\\\\n";
  if (d.eliminated.multiplier_value)
    out += d.eliminated.multiplier->latex() + " &= " + symexpr::to_latex(*d.eliminated.multiplier_value, &s.registry) + " \\\\\n";
  for (std::size_t a = 0; a < d.eliminated.dependents.size(); ++a) {
    std::string lhs = "\\mathsf{E}^{" + d.eliminated.dependents[a] + "}(L)";
    if (!d.eliminated.multiplier_value) {
      std::vector<std::string> terms;
      for (std::size_t g = 0; g < d.el.generators.size(); ++g) {
        auto adj = varcalc::adjoint_op(ctx.syzygies.at(g, a), ctx.space());
        if (!adj.is_zero()) terms.push_back("\\left(" + adj.latex(&s.registry) + "\\right)" + euler_latex(s, d.el.generators[g]));
      }
      if (!terms.empty()) out += lhs + " &= " + fmt::format("{}", fmt::join(terms, " + ")) + " \\\\\n";
      lhs.clear();
    }
    out += lhs + " &= " + symexpr::to_latex(d.eliminated.equations[a], &s.registry) + " \\\\\n";
  }
  for (std::size_t i = 0; i < d.boundary.C.size(); ++i)
    for (std::size_t a = 0; a < d.boundary.C[i].size(); ++a)
      for (const auto& [k, c] : d.boundary.C[i][a])
        out += fmt::format("C^{{{}}}_{{{},{}}} &= {} \\\\\n", d.boundary.dependents[a], symexpr::var_name(d.boundary.independent[i]),
                           k.empty() ? "0" : k.suffix(), symexpr::to_latex(c, &s.registry));
  return out + "\\end{align*}\n";
}

json to_json(const Laws& l) {
  const auto& s = *l.spec;
  json j = spec_header(s, "laws");
  j["lagrangian"] = l.source;
  j["ad_inverse"] = matrix_json(l.laws.ad_inverse, &s);
  if (!l.constraint_form.empty()) {
    json fis = json::array();
    for (const auto& f : l.first_integrals_on_constraint) fis.push_back(expr_json(f, &s));
    j["on_constraint"] = json{{"constraint", l.constraint_form},
                              {"ad_inverse", matrix_json(l.ad_inverse_on_constraint, &s)},
                              {"first_integrals", fis}};
  }
  json ups = json::array();
  for (std::size_t i = 0; i < l.laws.upsilon.size(); ++i) {
    json comps = json::array();
    for (const auto& e : l.laws.upsilon[i]) comps.push_back(expr_json(e, &s));
    ups.push_back(json{{"independent", symexpr::var_name(l.laws.independent[i])}, {"components", comps}});
  }
  j["upsilon"] = ups;
  json laws = json::array();
  for (std::size_t k = 0; k < l.laws.constants.size(); ++k) {
    json law;
    law["constant"] = l.laws.constants[k].text();
    law["trivial"] = static_cast<bool>(l.laws.trivial.at(k));
    if (l.laws.independent.size() == 1) law["first_integral"] = expr_json(l.laws.first_integrals()[k], &s);
    laws.push_back(law);
  }
  j["laws"] = laws;
  j["killing_form"] = json{{"semisimple", l.laws.semisimple}, {"matrix", rational_matrix_text(l.laws.killing)}};
  if (l.killing) j["killing_first_integral"] = equation_json(*l.killing, &s);
  json red = json::array();
  for (const auto& eq : l.reduced) red.push_back(equation_json(eq, &s));
  if (l.killing) j["reduced_system"] = red;
  if (!l.note.empty()) j["note"] = l.note;
  return j;
}

std::string to_text(const Laws& l) {
  const auto& s = *l.spec;
  std::string out = fmt::format("entry {}\nL = {}\n", s.name, l.source);
  out += "Ad(rho)^-1:\n" + text_matrix(l.laws.ad_inverse, "  ");
  if (!l.constraint_form.empty()) out += "Ad(rho)^-1 on " + l.constraint_form + ":\n" + text_matrix(l.ad_inverse_on_constraint, "  ");
  for (std::size_t i = 0; i < l.laws.upsilon.size(); ++i)
    out += fmt::format("upsilon_{} = {}\n", symexpr::var_name(l.laws.independent[i]), text_vector(l.laws.upsilon[i]));
  if (l.laws.independent.size() == 1) {
    auto fi = l.laws.first_integrals();
    for (std::size_t k = 0; k < fi.size(); ++k)
      out += fmt::format("law {}: {} = 0{}\n", k + 1, symexpr::to_text(fi[k]), l.laws.trivial.at(k) ? "  [trivial]" : "");
    for (std::size_t k = 0; k < l.first_integrals_on_constraint.size(); ++k)
      out += fmt::format("law {} on the constraint: {} = 0\n", k + 1, symexpr::to_text(l.first_integrals_on_constraint[k]));
  } else {
    for (std::size_t k = 0; k < l.laws.trivial.size(); ++k)
      if (l.laws.trivial[k]) out += fmt::format("law {} is trivial\n", k + 1);
  }
  out += "Killing form: " + rational_matrix_text(l.laws.killing) + "\n";
  if (l.killing) {
    out += fmt::format("Killing first integral: {} = {}\n", symexpr::to_text(l.killing->lhs), symexpr::to_text(l.killing->rhs));
    out += "reduced system:\n";
    for (const auto& eq : l.reduced)
      out += fmt::format("  [{}] {} = {}\n", eq.coordinate ? eq.coordinate->text() : "", symexpr::to_text(eq.lhs), symexpr::to_text(eq.rhs));
  }
  if (!l.note.empty()) out += "note: " + l.note + "\n";
  return out;
}

std::string to_latex(const Laws& l) {
  const auto& s = *l.spec;
  std::string out = latex_header("conservation laws for " + s.name);
  out += "\\[\n\\mathrm{Ad}(\\rho)^{-1} = " + latex_matrix(l.laws.ad_inverse, &s) + "\n\\]\n";
  if (!l.constraint_form.empty())
    out += "% on " + l.constraint_form + "\n\\[\n\\mathrm{Ad}(\\rho)^{-1} = " + latex_matrix(l.ad_inverse_on_constraint, &s) + "\n\\]\n";
  for (std::size_t i = 0; i < l.laws.upsilon.size(); ++i)
    out += fmt::format("\\[\n\\boldsymbol{{\\upsilon}}_{{{}}}(I) = {}\n\\]\n", symexpr::var_name(l.laws.independent[i]),
                       latex_vector(l.laws.upsilon[i], &s));
  if (l.laws.independent.size() == 1) {
    std::vector<Expr> c;
    for (const auto& k : l.laws.constants) c.emplace_back(k);
    out += "\\[\n\\mathrm{Ad}(\\rho)^{-1}" + latex_vector(l.laws.upsilon[0], &s) + " = " + latex_vector(c, &s) + "\n\\]\n";
  }
  if (l.killing) {
    out += "\\begin{align*}\n";
    out += symexpr::to_latex(l.killing->lhs, &s.registry) + " &= " + symexpr::to_latex(l.killing->rhs, &s.registry) + " \\\\\n";
    for (const auto& eq : l.reduced)
      out += symexpr::to_latex(eq.lhs, &s.registry) + " &= " + symexpr::to_latex(eq.rhs, &s.registry) + " \\\\\n";
    out += "\\end{align*}\n";
  }
  if (!l.note.empty()) out += "% " + l.note + "\n";
  return out;
}

namespace {

void symbolic_checks(const varcalc::Context& ctx, const Derivation& d, Verification& v, std::uint64_t seed) {
  for (std::size_t a = 0; a < d.oracle.size(); ++a)
    v.report.add("Euler-Lagrange " + d.el.dependents[a] + " equals the jet-coordinate Euler operator", d.oracle[a] ? 0.0 : 1.0, 0.0, 1);
  if (ctx.spec->constraint && ctx.spec->constraint->kind == "syzygy") {
    int hits = 0;
    auto scan = [&](const Expr& e) { hits += e.depends_on_kind(SymbolKind::Multiplier) ? 1 : 0; };
    for (const auto& e : d.eliminated.equations) scan(e);
    for (const auto& row : d.boundary.C)
      for (const auto& dep : row)
        for (const auto& [k, c] : dep) scan(c);
    v.report.add("multiplier absent from the derivation", hits, 0.0, 1);
  }
  const auto& jets = ctx.table->jets();
  if (jets.independent.size() == 1) {
    for (const auto& g : ctx.spec->generators) {
      Expr def = ctx.table->definition(Symbol(SymbolKind::Generator, g.name));
      Expr dd = jetcalc::total_derivative(def, jets.independent.front(), jets);
      auto r = numlab::fd_audit_total(def, dd, jets, seed + v.report.checks.size());
      r.checks.front().name = "D " + g.name + " by finite differences along sampled curves";
      v.report.append(r);
    }
  }
}

std::optional<numlab::Trajectory> run(const numlab::ExplicitSystem& sys, const std::map<std::string, double>& init, double span,
                                      double h, const std::string& entry, const std::string& lag, Verification& v) {
  std::map<std::string, double> full = init;
  for (const auto& s : sys.state)
    if (!full.count(s.text()) && !sys.curve_start.count(s)) {
      full[s.text()] = 0.0;
      v.notes.push_back("initial value of " + s.text() + " set to 0");
    }
  try {
    auto t = numlab::integrate_el(sys, numlab::resolve_init(sys, full), span, h);
    t.entry = entry;
    t.lagrangian = lag;
    return t;
  } catch (const numlab::BlowUp& e) {
    v.report.add("integration", std::numeric_limits<double>::infinity(), numlab::kBlowUp, 0, e.what());
    return std::nullopt;
  }
}

double drift(const varcalc::ConservationLawSet& laws, const numlab::Trajectory& t) {
  double m = 0.0;
  for (const auto& c : numlab::check_constancy(laws, t).checks) m = std::max(m, c.residual);
  return m;
}

}  // namespace

Verification verify(const varcalc::Context& ctx, const std::string& lagrangian, const VerifyOptions& opt) {
  const auto& spec = *ctx.spec;
  Verification v;
  v.entry = spec.name;
  const bool curve = spec.independent.size() == 1;
  numlab::Demo demo;
  if (curve) {
    demo = numlab::conservation_demo(spec.name);
    v.source = lagrangian.empty() ? demo.lagrangian : lagrangian;
  } else {
    if (lagrangian.empty()) throw std::invalid_argument(spec.name + " has no numeric demo; pass a Lagrangian");
    v.source = lagrangian;
  }
  const bool is_demo = curve && v.source == demo.lagrangian;
  auto d = derive(ctx, v.source);
  symbolic_checks(ctx, d, v, opt.seed);
  if (!curve) {
    v.notes.push_back("numeric checks need one independent variable");
    return v;
  }
  auto L = d.lagrangian;
  v.laws = varcalc::noether_laws(ctx, L);
  const auto& laws = *v.laws;
  auto base = numlab::explicit_system(d.eliminated);
  auto sys = numlab::with_curve(base, ctx);
  std::map<std::string, double> init = is_demo ? demo.init : std::map<std::string, double>{};
  for (const auto& [k, x] : opt.init) init[k] = x;
  const double h = opt.step.value_or(demo.h), span = opt.span.value_or(demo.span);
  if (is_demo) v.notes.push_back("demo initial data (implementation choice): " + demo.note);
  v.notes.push_back("curve starts at the identity frame");
  auto t = run(sys, init, span, h, spec.name, v.source, v);
  if (!t) return v;
  v.report.append(numlab::check_constancy(laws, *t));
  if (laws.semisimple) v.report.append(numlab::check_killing(laws, *t));
  {
    const double span2 = std::min(span, 10.0);
    auto a = run(sys, init, span2, 1e-2, spec.name, v.source, v), b = run(sys, init, span2, 5e-3, spec.name, v.source, v);
    if (a && b) {
      const double da = drift(laws, *a), db = drift(laws, *b);
      if (da < 1e-12) {
        v.report.add_info("conservation drift order (h = 1e-2, 5e-3)", 0.0, 0.3, 2,
                          fmt::format("drift {:.3g} is at rounding level", da));
      } else {
        const double order = std::log2(da / db);
        v.report.add("conservation drift order (h = 1e-2, 5e-3)", std::abs(order - 4.0), 0.3, 2,
                     fmt::format("observed order {:.4f}", order));
      }
    }
    auto el_init = init;
    for (auto it = el_init.begin(); it != el_init.end();)
      it = std::any_of(base.state.begin(), base.state.end(), [&](const Symbol& s) { return s.text() == it->first; }) ? std::next(it)
                                                                                                                     : el_init.erase(it);
    for (const auto& s : base.state) el_init.emplace(s.text(), 0.0);
    try {
      const double order = numlab::convergence_order(base, numlab::resolve_init(base, el_init), span2, 1e-2);
      if (std::isfinite(order))
        v.report.add("RK4 order (h = 1e-2, 5e-3)", std::abs(order - 4.0), 0.3, 2, fmt::format("observed order {:.4f}", order));
      else
        v.report.add_info("RK4 order (h = 1e-2, 5e-3)", 0.0, 0.3, 2, "error at rounding level");
    } catch (const numlab::BlowUp& e) {
      v.report.add("RK4 order (h = 1e-2, 5e-3)", std::numeric_limits<double>::infinity(), 0.3, 0, e.what());
    }
  }
  std::optional<numlab::Trajectory> rt;
  if (spec.name == "se2-curve" || !is_demo || !opt.init.empty()) {
    rt = t;
  } else {
    auto rd = numlab::reconstruction_demo(spec.name);
    v.notes.push_back("reconstruction demo (implementation choice): " + rd.lagrangian + "; " + rd.note);
    rt = run(sys, rd.init, opt.span.value_or(rd.span), h, spec.name, rd.lagrangian, v);
  }
  if (rt) {
    try {
      auto c = numlab::law_constants(laws, *rt);
      if (rt->lagrangian != v.source) c = numlab::law_constants(varcalc::noether_laws(ctx, varcalc::parse_lagrangian(ctx, rt->lagrangian)), *rt);
      auto rec = numlab::reconstruct_curve(spec.name, *rt, c);
      v.report.append(rec.report);
      const numlab::Check *good = nullptr, *bad = nullptr;
      for (const auto& k : rec.report.checks) {
        if (k.name == "radicand c1^2 + 4 c2 c3") good = &k;
        if (k.name == "radicand c2^2 + 4 c2 c3") bad = &k;
      }
      if (good && bad)
        v.notes.push_back(fmt::format("radicand finding: beta = sqrt(c1^2 + 4 c2 c3) {} the reduced equation (residual {:.3e}); "
                                      "beta = sqrt(c2^2 + 4 c2 c3) {} it (residual {:.3e})",
                                      good->pass ? "satisfies" : "violates", good->residual, bad->pass ? "satisfies" : "violates",
                                      bad->residual));
    } catch (const numlab::DegenerateReconstruction& e) {
      v.report.add_info("closed-form reconstruction", std::numeric_limits<double>::infinity(), 0.0, 0, e.what());
    } catch (const varcalc::ZeroConstants& e) {
      v.report.add_info("closed-form reconstruction", std::numeric_limits<double>::infinity(), 0.0, 0, e.what());
    }
  }
  v.trajectory = std::move(t);
  return v;
}

json to_json(const Verification& v) {
  json j;
  j["schema"] = kSchema;
  j["command"] = "verify";
  j["entry"] = v.entry;
  j["lagrangian"] = v.source;
  j["notes"] = v.notes;
  auto r = numlab::to_json(v.report);
  j["pass"] = r["pass"];
  j["checks"] = r["checks"];
  if (v.trajectory) {
    json t;
    t["h"] = v.trajectory->h;
    t["nodes"] = v.trajectory->size();
    t["span"] = v.trajectory->s.back();
    t["state"] = json::array();
    for (const auto& c : v.trajectory->columns) t["state"].push_back(c.text());
    j["trajectory"] = t;
  }
  return j;
}

std::string to_text(const Verification& v) {
  std::string out = fmt::format("entry {}\nL = {}\n", v.entry, v.source);
  for (const auto& n : v.notes) out += "note: " + n + "\n";
  for (const auto& c : v.report.checks)
    out += fmt::format("{} {}: residual {:.3e}, tolerance {:.1e}, samples {}{}\n", c.informational ? "INFO" : (c.pass ? "PASS" : "FAIL"),
                       c.name, c.residual, c.tolerance, c.samples, c.note.empty() ? "" : " (" + c.note + ")");
  out += v.pass() ? "verdict: pass\n" : "verdict: fail\n";
  return out;
}

std::string to_latex(const Verification& v) {
  auto esc = [](std::string s) {
    std::string o;
    for (char ch : s) {
      if (ch == '^') {
        o += "\\^{}";
        continue;
      }
      if (ch == '_' || ch == '&' || ch == '%' || ch == '#') o += '\\';
      o += ch;
    }
    return o;
  };
  std::string out = latex_header("verification for " + v.entry);
  out += "\\begin{tabular}{llll}\ncheck & residual & tolerance & verdict \\\\\n\\hline\n";
  for (const auto& c : v.report.checks)
    out += fmt::format("{} & {:.3e} & {:.1e} & {} \\\\\n", esc(c.name), c.residual, c.tolerance,
                       c.informational ? "info" : (c.pass ? "pass" : "fail"));
  return out + "\\end{tabular}\n";
}

void write_plot_csv(std::ostream& os, const Verification& v) {
  if (!v.trajectory || !v.laws) throw std::invalid_argument("no trajectory to plot");
  std::vector<std::pair<std::string, Expr>> extra;
  const auto& t = *v.trajectory;
  for (const char* n : {"x", "u"}) {
    Symbol s(SymbolKind::Jet, n);
    if (t.column(s) >= 0) continue;
    try {
      t.compile(Expr(s));
      extra.emplace_back(n, Expr(s));
    } catch (const numlab::MissingVariable&) {
    }
  }
  for (std::size_t k = 0; k < v.laws->constants.size(); ++k) extra.emplace_back(fmt::format("law{}", k + 1), v.laws->component(0, k));
  numlab::write_csv(os, t, extra);
}

}  // namespace mframe::report
