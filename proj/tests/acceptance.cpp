// Acceptance gate: one pass/fail line per criterion.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mframe/report.hpp"

using namespace mframe;
using namespace mframe::symexpr;
using liegroup::Matrix;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  std::function<Verdict()> run;
};

const liegroup::GroupActionSpec& entry(const std::string& n) { return liegroup::catalog(n); }
const varcalc::Context& ctx(const std::string& n) { return varcalc::context(entry(n)); }
Expr G(const std::string& n, const std::string& t) { return entry(n).parse(t); }
Symbol S(const std::string& n, const std::string& t) { return entry(n).registry.resolve(t); }
jetcalc::JetSpace F(const std::string& n) { return entry(n).generator_space(); }
Expr c(int k) { return Expr(Symbol(SymbolKind::Constant, "c" + std::to_string(k))); }

varcalc::InvariantLagrangian lag(const std::string& n, const std::string& t) { return varcalc::parse_lagrangian(ctx(n), t); }

Expr D(const std::string& n, const Expr& e, int k = 1) {
  const Var v = entry(n).independent.front();
  return ctx(n).table->reduce(jetcalc::total_derivative(e, MultiIndex(v, k), F(n)));
}

Expr euler(const std::string& n, const Expr& L, const std::string& g) {
  return ctx(n).table->reduce(jetcalc::euler_operator(L, {SymbolKind::Generator, g}, F(n)));
}

varcalc::ELSystem el(const std::string& n, const varcalc::InvariantLagrangian& L) {
  return varcalc::eliminate_multiplier(ctx(n), varcalc::invariant_el(ctx(n), L), L);
}

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

// Accumulates exact comparisons; the first mismatch is kept for the report.
struct Golden {
  int total = 0, failed = 0;
  std::string first;

  void eq(const Expr& got, const Expr& want, const std::string& what) {
    ++total;
    if (is_zero(got - want)) return;
    if (failed++ == 0) first = fmt::format("{}: got {}, printed {}", what, got.str(), want.str());
  }
  void truth(bool ok, const std::string& what) {
    ++total;
    if (!ok && failed++ == 0) first = what;
  }
  Verdict verdict() const {
    if (failed == 0) return {true, fmt::format("{} of {} exact", total, total)};
    return {false, fmt::format("{} of {} comparisons differ; {}", failed, total, first)};
  }
};

const std::map<std::string, std::vector<std::string>>& fixed_lagrangians() {
  static const std::map<std::string, std::vector<std::string>> m{
      {"sl2-action1", {"sigma_x^2/2", "sigma^3 + sigma*sigma_xx"}},
      {"sl2-surface", {"sigma_x^2/2 + kappa*sigma_t + kappa_x^2", "kappa^2*sigma + sigma_t*kappa_x"}},
      {"sl2-action2", {"sigma_s^2/2 + sigma", "sigma^2*sigma_ss + sigma_s^2"}},
      {"sl2-action3", {"sigma^2/2 + eta^2/2", "eta_s^2 + sigma*eta"}},
      {"se2-curve", {"kappa^2", "kappa_s^2 + kappa^4"}},
  };
  return m;
}

// ---- 1: symbolic golden set ----

Verdict schwarzian() {
  Golden g;
  const std::string n = "sl2-action1";
  g.eq(frame::invariantize(G(n, "u_xxx"), ctx(n).frame), G(n, "u_xxx/u_x - 3/2*(u_xx/u_x)^2"), "I(u_xxx)");
  return g.verdict();
}

Verdict frame_formula() {
  Golden g;
  const std::string n = "sl2-action1";
  const auto& rho = ctx(n).frame.rho;
  g.eq(rho.at("a"), G(n, "u_x^(-1/2)"), "a");
  g.eq(rho.at("b"), G(n, "-u*u_x^(-1/2)"), "b");
  g.eq(rho.at("c"), G(n, "u_xx/(2*u_x^(3/2))"), "c");
  return g.verdict();
}

Verdict adjoint_transpose() {
  const auto& s = entry("sl2-action1");
  Matrix want = {{s.parse("a*d + b*c"), s.parse("c*d"), s.parse("-a*b")},
                 {s.parse("2*b*d"), s.parse("d^2"), s.parse("-b^2")},
                 {s.parse("-2*a*c"), s.parse("-c^2"), s.parse("a^2")}};
  Bindings d{{s.param("d"), s.derived.at("d")}};
  want = liegroup::map(want, [&](const Expr& e) { return subst(e, d); });
  auto got = liegroup::transpose(liegroup::adjoint_matrix(s));
  Golden g;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) g.eq(got[i][j], want[i][j], fmt::format("Ad(g)^T[{}][{}]", i, j));
  return g.verdict();
}

Verdict killing_matrix() {
  liegroup::RationalMatrix want = {{8, 0, 0}, {0, 0, 4}, {0, 4, 0}};
  Golden g;
  for (const std::string n : {"sl2-action1", "sl2-action2", "sl2-action3", "sl2-surface"})
    g.truth(liegroup::killing_form(entry(n)) == want, n + ": Killing matrix differs");
  return g.verdict();
}

Verdict syzygies() {
  Golden g;
  using jetcalc::LinDiffOp;
  for (const std::string n : {"sl2-action1", "sl2-surface"}) {
    LinDiffOp h = LinDiffOp::derivative(MultiIndex(Var::x, 3));
    h.add(MultiIndex(Var::x), G(n, "2*sigma"));
    h.add(MultiIndex(), G(n, "sigma_x"));
    g.truth(ctx(n).syzygies.at(0, 0) == h, n + ": H = " + ctx(n).syzygies.at(0, 0).str());
  }
  const std::string n = "sl2-surface";
  LinDiffOp h2 = LinDiffOp::derivative(MultiIndex(Var::t));
  h2.add(MultiIndex(Var::x), G(n, "-kappa"));
  h2.add(MultiIndex(), G(n, "kappa_x"));
  g.truth(ctx(n).syzygies.at(1, 0) == h2, "H2 = " + ctx(n).syzygies.at(1, 0).str());
  return g.verdict();
}

Verdict projective_el() {
  Golden g;
  const std::string n = "sl2-action1";
  auto e = varcalc::invariant_el(ctx(n), lag(n, "sigma_x^2/2"));
  Expr s = G(n, "-sigma_xx");
  Expr printed = -(D(n, s, 3) + G(n, "2*sigma") * D(n, s) + G(n, "sigma_x") * s);
  g.eq(e.equations.at(0), printed, "E^u(L)");
  return g.verdict();
}

Verdict upsilon_vectors() {
  Golden g;
  {
    const std::string n = "sl2-action1";
    for (const auto& t : fixed_lagrangians().at(n)) {
      auto L = lag(n, t);
      auto laws = varcalc::noether_laws(ctx(n), L);
      Expr e = euler(n, L.L, "sigma");
      std::vector<Expr> want{Expr(-2) * D(n, e), G(n, "sigma") * e + D(n, e, 2), Expr(-2) * e};
      for (std::size_t k = 0; k < 3; ++k) g.eq(laws.upsilon.at(0).at(k), want[k], n + " upsilon_" + std::to_string(k + 1));
    }
  }
  {
    const std::string n = "sl2-surface";
    for (const auto& t : fixed_lagrangians().at(n)) {
      auto L = lag(n, t);
      auto laws = varcalc::noether_laws(ctx(n), L);
      std::vector<Expr> want{Expr(0), euler(n, L.L, "kappa"), Expr(0)};
      for (std::size_t k = 0; k < 3; ++k) g.eq(laws.upsilon.at(1).at(k), want[k], n + " upsilon_2," + std::to_string(k + 1));
    }
  }
  {
    const std::string n = "se2-curve";
    auto l = report::laws(ctx(n), "kappa^2");
    std::vector<Expr> want{G(n, "-kappa^2"), G(n, "-2*kappa_s"), G(n, "2*kappa")};
    for (std::size_t k = 0; k < 3; ++k) g.eq(l.laws.upsilon.at(0).at(k), want[k], "elastica upsilon_" + std::to_string(k + 1));
    Matrix m = {{G(n, "x_s"), G(n, "-u_s"), Expr(0)},
                {G(n, "u_s"), G(n, "x_s"), Expr(0)},
                {G(n, "x*u_s - u*x_s"), G(n, "u*u_s + x*x_s"), Expr(1)}};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        g.eq(l.ad_inverse_on_constraint.at(i).at(j), m[i][j], fmt::format("elastica Ad(rho)^-1[{}][{}]", i, j));
  }
  return g.verdict();
}

Verdict first_integrals() {
  Golden g;
  for (const auto& t : fixed_lagrangians().at("sl2-action1")) {
    const std::string n = "sl2-action1";
    auto L = lag(n, t);
    auto eq = varcalc::killing_first_integral(varcalc::noether_laws(ctx(n), L));
    Expr e = euler(n, L.L, "sigma");
    g.eq(eq.lhs, Expr(4) * D(n, e).pow(2) - Expr(8) * e * D(n, e, 2) - Expr(8) * G(n, "sigma") * e.pow(2), n + " lhs");
    g.eq(eq.rhs, c(1).pow(2) + Expr(4) * c(2) * c(3), n + " rhs");
  }
  for (const auto& t : fixed_lagrangians().at("sl2-action3")) {
    const std::string n = "sl2-action3";
    auto L = lag(n, t);
    auto eq = varcalc::killing_first_integral(varcalc::noether_laws(ctx(n), L));
    Expr es = euler(n, L.L, "sigma"), ee = euler(n, L.L, "eta");
    g.eq(eq.lhs, Expr(4) * ee.pow(2) + Expr(24) * G(n, "sigma") * es.pow(2) - Expr(24) * es * D(n, ee), n + " lhs");
    g.eq(eq.rhs, c(1).pow(2) + Expr(4) * c(2) * c(3), n + " rhs");
  }
  return g.verdict();
}

bool has_row(const std::vector<varcalc::Equation>& rows, const Expr& r, const Bindings& b = {}) {
  for (const auto& row : rows)
    if (is_zero(subst(row.residual(), b) - r)) return true;
  return false;
}

Verdict reduced_equations() {
  Golden g;
  for (const auto& t : fixed_lagrangians().at("sl2-action1")) {
    const std::string n = "sl2-action1";
    auto L = lag(n, t);
    auto rows = varcalc::reduced_system(ctx(n), varcalc::noether_laws(ctx(n), L));
    Expr e = euler(n, L.L, "sigma");
    g.truth(has_row(rows, Expr(-2) * e * G(n, "u_x") - c(1) * G(n, "u") + c(2) * G(n, "u^2") - c(3)), n + ": row missing for " + t);
  }
  for (const auto& t : fixed_lagrangians().at("sl2-action2")) {
    const std::string n = "sl2-action2";
    auto L = lag(n, t);
    auto rows = varcalc::reduced_system(ctx(n), varcalc::noether_laws(ctx(n), L));
    Expr e = euler(n, L.L, "sigma");
    Expr row = Expr(-2) * e * G(n, "u") - c(1) * G(n, "x") + c(2) * G(n, "x^2") - c(3);
    g.truth(has_row(rows, row), n + ": row missing for " + t);
    // with x_s = u the row becomes the Action 1 equation in x
    Bindings tangent{{S(n, "u"), G(n, "x_s")}};
    g.truth(has_row(rows, Expr(-2) * e * G(n, "x_s") - c(1) * G(n, "x") + c(2) * G(n, "x^2") - c(3), tangent),
            n + ": x_s = u form missing for " + t);
  }
  for (const auto& t : fixed_lagrangians().at("sl2-action3")) {
    const std::string n = "sl2-action3";
    auto L = lag(n, t);
    auto rows = varcalc::reduced_system(ctx(n), varcalc::noether_laws(ctx(n), L));
    Expr es = euler(n, L.L, "sigma"), ee = euler(n, L.L, "eta");
    g.truth(has_row(rows, Expr(6) * es * G(n, "x_s") - c(1) * G(n, "x") + c(2) * G(n, "x^2") - c(3)), n + ": first row missing for " + t);
    g.truth(has_row(rows, Expr(2) * ee * G(n, "x_s") - Expr(2) * es * G(n, "x_s^2*u") - c(1) * G(n, "x_s") +
                              Expr(2) * c(2) * G(n, "x*x_s")),
            n + ": second row missing for " + t);
  }
  return g.verdict();
}

Verdict action_two_el() {
  Golden g;
  const std::string n = "sl2-action2";
  std::string derived;
  for (const std::string t : {"sigma_ss^2/2 + sigma*sigma_s^2 + sigma^3", "sigma_s^2/2 + sigma", "sigma^2*sigma_ss"}) {
    auto L = lag(n, t);
    auto e = el(n, L);
    Expr E = euler(n, L.L, "sigma");
    Expr ls = diff(L.L, S(n, "sigma_s")), lss = diff(L.L, S(n, "sigma_ss"));
    Expr sg = G(n, "sigma"), s1 = G(n, "sigma_s"), s2 = G(n, "sigma_ss");
    Expr printed = D(n, E, 2) - Expr(2) * sg * E + L.L - (ls - D(n, lss)) * s1 + lss * s2;
    g.truth(e.equations.at(0).is_zero(), "E^x(L) does not vanish after elimination");
    g.truth(!e.equations.at(1).depends_on_kind(SymbolKind::Multiplier), "multiplier left in E^u(L)");
    Expr factor;
    const bool up_to_factor = varcalc::equal_up_to_constant(e.equations.at(1), printed, &factor);
    g.truth(up_to_factor, fmt::format("L = {}: E^u(L) = {}, printed form gives {}", t, e.equations.at(1).str(), printed.str()));
    Expr mine = D(n, E, 2) + Expr(2) * sg * E - L.L + (ls - D(n, lss)) * s1 + lss * s2;
    if (derived.empty() && e.equations.at(1) == mine)
      derived = "derived E^u(L) = D^2 E + 2 sigma E - L + (L_sigma_s - D L_sigma_ss) sigma_s + L_sigma_ss sigma_ss";
  }
  auto v = g.verdict();
  if (!derived.empty()) v.detail += "; " + derived;
  return v;
}

Verdict elastica_el() {
  const std::string n = "se2-curve";
  auto e = el(n, lag(n, "kappa^2"));
  Expr factor;
  if (!e.equations.at(0).is_zero()) return {false, "E^x(L) does not vanish after elimination"};
  if (!varcalc::equal_up_to_constant(e.equations.at(1), G(n, "kappa_ss + kappa^3/2"), &factor))
    return {false, "E^u(L) = " + e.equations.at(1).str()};
  return {true, fmt::format("E^u(L) = {} = {} (kappa_ss + kappa^3/2)", e.equations.at(1).str(), factor.str())};
}

// ---- 2: oracle equivalence ----

Verdict oracle_equivalence() {
  int total = 0;
  std::vector<std::string> bad;
  for (const auto& [n, texts] : fixed_lagrangians()) {
    std::vector<varcalc::InvariantLagrangian> ls;
    for (const auto& t : texts) ls.push_back(lag(n, t));
    ls.push_back(varcalc::make_lagrangian(ctx(n), varcalc::random_lagrangian(ctx(n), 0x1a9 + n.size(), 2)));
    for (const auto& L : ls) {
      auto e = varcalc::invariant_el(ctx(n), L);
      for (const auto& r : varcalc::el_oracle_residuals(ctx(n), L, e)) {
        ++total;
        if (!zero_test(r).zero) bad.push_back(n + ": " + L.L.str());
      }
    }
  }
  if (!bad.empty()) return {false, fmt::format("{} of {} disagree, first {}", bad.size(), total, bad.front())};
  return {true, fmt::format("{} dependent equations over 15 Lagrangians agree, recorded factor 1", total)};
}

// ---- 3: equivariance and representation ----

Verdict equivariance() {
  double worst = 0.0;
  int sym = 0;
  for (const auto& n : liegroup::catalog_names()) {
    const auto& f = ctx(n).frame;
    for (const auto& nm : entry(n).normalizations) {
      if (!is_zero(frame::invariantize(Expr(nm.coordinate), f) - Expr(nm.value)))
        return {false, n + ": normalization " + nm.coordinate.text() + " fails at the frame"};
      ++sym;
    }
    auto rep = frame::check_equivariance(f, 100, 0x5a17);
    if (rep.samples != 100) return {false, n + ": sampling fell short"};
    worst = std::max({worst, rep.frame_residual, rep.invariant_residual, rep.cross_section_residual});
  }
  if (worst > 1e-9) return {false, fmt::format("max residual {:.3e} > 1e-9", worst)};
  return {true, fmt::format("{} normalizations exact; 100 samples per entry, max residual {:.3e}", sym, worst)};
}

Verdict representation() {
  for (const std::string n : {"sl2-action1", "sl2-action2", "sl2-action3", "sl2-surface"}) {
    const auto& s = entry(n);
    Matrix ad = liegroup::adjoint_matrix(s);
    std::map<std::string, Expr> h;
    for (const auto& p : s.parameters) h[p] = Expr(s.param2(p));
    if (!matrix_zero(sub(liegroup::multiply(ad, liegroup::adjoint_at(s, ad, h)), liegroup::adjoint_at(s, ad, s.product))))
      return {false, n + ": Ad(g) Ad(h) != Ad(gh)"};
    Matrix B = liegroup::to_matrix(liegroup::killing_form(s));
    if (!matrix_zero(sub(liegroup::multiply(liegroup::multiply(ad, B), liegroup::transpose(ad)), B)))
      return {false, n + ": Ad B Ad^T != B"};
  }
  return {true, "four sl2 entries, symbolic"};
}

// ---- 4, 5: numerics ----

struct Run {
  numlab::Trajectory traj;
  varcalc::ConservationLawSet laws;
};

Run integrate(const numlab::Demo& d, double h) {
  auto L = lag(d.entry, d.lagrangian);
  auto sys = numlab::with_curve(numlab::explicit_system(el(d.entry, L)), ctx(d.entry));
  auto t = numlab::integrate_el(sys, numlab::resolve_init(sys, d.init), d.span, h);
  t.entry = d.entry;
  t.lagrangian = d.lagrangian;
  return {t, varcalc::noether_laws(ctx(d.entry), L)};
}

double drift(const Run& r) {
  double m = 0.0;
  for (const auto& k : numlab::check_constancy(r.laws, r.traj).checks) m = std::max(m, k.residual);
  return m;
}

Verdict conservation() {
  std::vector<std::string> parts;
  bool ok = true;
  for (const std::string n : {"se2-curve", "sl2-action1"}) {
    auto d = numlab::conservation_demo(n);
    if (d.span != 10.0 || d.h != 1e-3) return {false, n + ": demo grid is not h = 1e-3 on [0, 10]"};
    auto r = integrate(d, 1e-3);
    const double m = drift(r);
    auto coarse = d;
    const double da = drift(integrate(coarse, 1e-2)), db = drift(integrate(coarse, 5e-3));
    const double order = std::log2(da / db);
    ok = ok && m <= 1e-6 && std::abs(order - 4.0) <= 0.3;
    parts.push_back(fmt::format("{} max drift {:.2e}, order {:.3f}", n, m, order));
  }
  return {ok, fmt::format("{}", fmt::join(parts, "; "))};
}

Verdict reconstruction() {
  std::vector<std::string> parts;
  bool ok = true;
  {
    auto r = integrate(numlab::conservation_demo("se2-curve"), 1e-3);
    auto rec = numlab::reconstruct_curve("se2-curve", r.traj, numlab::law_constants(r.laws, r.traj));
    double m = 0.0;
    int n = 0;
    for (const auto& k : rec.report.checks)
      if (k.tolerance == 1e-6) {
        m = std::max(m, k.residual);
        ++n;
      }
    ok = ok && n == 3 && m < 1e-6;
    parts.push_back(fmt::format("elastica rows max {:.2e}", m));
  }
  std::string finding;
  for (const std::string e : {"sl2-action1", "sl2-action2", "sl2-action3"}) {
    auto r = integrate(numlab::reconstruction_demo(e), 1e-3);
    auto rec = numlab::reconstruct_curve(e, r.traj, numlab::law_constants(r.laws, r.traj));
    double m = 0.0, good = 0.0, bad = 0.0;
    for (const auto& k : rec.report.checks) {
      if (k.name.rfind("reduced row", 0) == 0 || k.name == "x_s = u") m = std::max(m, k.residual);
      if (k.name == "radicand c1^2 + 4 c2 c3") good = k.residual;
      if (k.name == "radicand c2^2 + 4 c2 c3") bad = k.residual;
    }
    ok = ok && m < 1e-8 && good < 1e-8 && bad > 1e-8;
    parts.push_back(fmt::format("{} rows max {:.2e}", e, m));
    finding += fmt::format(" {}: c1 radicand {:.1e}, c2 radicand {:.1e};", e, good, bad);
  }
  auto v = report::verify(ctx("sl2-action1"), "", {});
  bool recorded = false;
  for (const auto& note : v.notes) recorded = recorded || note.rfind("radicand finding: beta = sqrt(c1^2 + 4 c2 c3) satisfies", 0) == 0;
  ok = ok && recorded;
  return {ok, fmt::format("{}; beta = sqrt(c1^2 + 4 c2 c3) confirmed by residual,{} finding {}in the report", fmt::join(parts, "; "),
                          finding, recorded ? "" : "not ")};
}

// ---- 6: multiplier cancellation ----

Verdict multiplier_cancellation() {
  const std::string n = "sl2-surface";
  auto texts = fixed_lagrangians().at(n);
  texts.push_back(varcalc::random_lagrangian(ctx(n), 0x51, 2).str());
  for (const auto& t : texts) {
    auto d = report::derive(ctx(n), t);
    const std::string out =
        report::render(d, report::Format::Json) + report::render(d, report::Format::Latex) + report::render(d, report::Format::Text);
    if (out.find("lambda") != std::string::npos) return {false, "lambda in the output for L = " + t};
    for (const auto& e : d.eliminated.equations)
      if (e.depends_on_kind(SymbolKind::Multiplier)) return {false, "multiplier in E^u(L) for L = " + t};
  }
  return {true, fmt::format("{} Lagrangians, JSON, LaTeX and text scanned", texts.size())};
}

// ---- 7: determinism ----

struct Output {
  int code = -1;
  std::string out;
};

Output run_cli(const std::string& cli, const std::string& args) {
  Output r;
  FILE* p = popen((cli + " " + args + " 2>/dev/null").c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t k = 0;
  while ((k = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), k);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

Verdict determinism(const std::string& cli) {
  const std::vector<std::string> golden = {
      "catalog",
      "derive --entry sl2-action1 --lagrangian 'sigma_x^2/2'",
      "derive --entry sl2-surface --lagrangian 'sigma_x^2/2 + kappa*sigma_t + kappa_x^2'",
      "derive --entry sl2-action2 --lagrangian 'sigma_s^2/2 + sigma'",
      "derive --entry se2-curve --lagrangian 'kappa^2'",
      "laws --entry se2-curve --lagrangian 'kappa^2'",
      "laws --entry sl2-action1 --lagrangian 'sigma_x^2/2'",
      "laws --entry sl2-action3 --lagrangian 'sigma^2/2 + eta^2/2'",
      "verify --entry se2-curve",
      "verify --entry sl2-action1",
      "verify --entry sl2-action2",
      "verify --entry sl2-action3",
      "derive --entry nosuch --lagrangian 'sigma'",
  };
  for (const auto& g : golden) {
    auto a = run_cli(cli, g), b = run_cli(cli, g);
    if (a.code < 0) return {false, "could not run " + g};
    if (a.code != b.code || a.out != b.out) return {false, "output differs for " + g};
  }
  return {true, fmt::format("{} golden commands byte-identical", golden.size())};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli = MFRAME_CLI;
  std::set<std::string> known;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--known" && i + 1 < argc) {
      known.insert(argv[++i]);
    } else if (a == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else {
      std::cerr << "usage: mframe_acceptance [--known ID]... [--cli PATH]\n";
      return 2;
    }
  }
  const std::vector<Criterion> all = {
      {"1a", "Schwarzian as the invariantization of u_xxx", schwarzian},
      {"1b", "projective frame in parametric form", frame_formula},
      {"1c", "Ad(g)^T matrix of the projective action", adjoint_transpose},
      {"1d", "Killing matrix [[8,0,0],[0,0,4],[0,4,0]]", killing_matrix},
      {"1e", "syzygy operators H and H2", syzygies},
      {"1f", "Euler-Lagrange equation for L = sigma_x^2/2", projective_el},
      {"1g", "upsilon vectors and the Euclidean law matrix", upsilon_vectors},
      {"1h", "Killing first integrals of Actions 1 and 3", first_integrals},
      {"1i", "reduced equations of Actions 1, 2 and 3", reduced_equations},
      {"1j", "Action 2 Euler-Lagrange equation after multiplier elimination", action_two_el},
      {"1k", "elastica equation kappa_ss + kappa^3/2 = 0", elastica_el},
      {"2", "invariant route agrees with the jet-coordinate Euler operator", oracle_equivalence},
      {"3a", "frame normalizations and equivariance", equivariance},
      {"3b", "Ad(g)Ad(h) = Ad(gh) and Ad B Ad^T = B", representation},
      {"4", "conservation along RK4 extremals with fourth-order drift", conservation},
      {"5", "reconstruction residuals and the beta radicand", reconstruction},
      {"6", "no multiplier in the sl2-surface derivation", multiplier_cancellation},
      {"7", "byte-identical JSON across repeated CLI runs", [&] { return determinism(cli); }},
  };
  int passed = 0;
  std::vector<std::string> failed;
  for (const auto& c : all) {
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << fmt::format("{} {:<3} {}: {}\n", v.pass ? "PASS" : "FAIL", c.id, c.title, v.detail) << std::flush;
    if (v.pass)
      ++passed;
    else
      failed.push_back(c.id);
  }
  std::vector<std::string> unexpected, recorded;
  for (const auto& f : failed) (known.count(f) ? recorded : unexpected).push_back(f);
  std::vector<std::string> fixed;
  for (const auto& k : known)
    if (std::find(failed.begin(), failed.end(), k) == failed.end()) fixed.push_back(k);
  std::cout << fmt::format("{} of {} criteria pass", passed, all.size());
  if (!recorded.empty()) std::cout << fmt::format("; recorded deviations failing as analysed: {}", fmt::join(recorded, ", "));
  if (!unexpected.empty()) std::cout << fmt::format("; unexpected failures: {}", fmt::join(unexpected, ", "));
  if (!fixed.empty()) std::cout << fmt::format("; recorded deviations now passing: {}", fmt::join(fixed, ", "));
  std::cout << "\n";
  return unexpected.empty() && fixed.empty() ? 0 : 1;
}
