#include "mframe/poly.hpp"

#include <algorithm>
#include <cassert>

#include "mframe/expr.hpp"

namespace mframe::symexpr {

std::string func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tanh: return "tanh";
    case Func::Sech: return "sech";
    case Func::Atan: return "atan";
  }
  return "?";
}

Atom make_symbol_atom(const Symbol& s) {
  auto n = std::make_shared<AtomNode>();
  n->kind = AtomKind::Symbol;
  n->sym = s;
  return n;
}

Atom make_radical_atom(Poly radicand) {
  auto n = std::make_shared<AtomNode>();
  n->kind = AtomKind::Radical;
  n->radicand = std::make_shared<const Poly>(std::move(radicand));
  return n;
}

Atom make_function_atom(Func f, Expr arg) {
  auto n = std::make_shared<AtomNode>();
  n->kind = AtomKind::Function;
  n->fn = f;
  n->arg = std::make_shared<const Expr>(std::move(arg));
  return n;
}

int compare(const Atom& a, const Atom& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  switch (a->kind) {
    case AtomKind::Symbol: {
      auto c = a->sym <=> b->sym;
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case AtomKind::Radical:
      return a->radicand->compare(*b->radicand);
    case AtomKind::Function:
      if (a->fn != b->fn) return a->fn < b->fn ? -1 : 1;
      return a->arg->compare(*b->arg);
  }
  return 0;
}

// ---------------------------------------------------------------- Monomial

Monomial::Monomial(Atom a, int e) {
  if (e != 0) {
    f_.emplace_back(std::move(a), e);
    deg_ = e;
  }
}

void Monomial::set_factors(std::vector<Factor> f) {
  f_ = std::move(f);
  deg_ = 0;
  for (const auto& [a, e] : f_) deg_ += e;
}

int Monomial::exponent(const Atom& a) const {
  for (const auto& [b, e] : f_) {
    int c = compare(a, b);
    if (c == 0) return e;
    if (c < 0) break;
  }
  return 0;
}

Monomial Monomial::operator*(const Monomial& o) const {
  if (o.f_.empty()) return *this;
  if (f_.empty()) return o;
  Monomial m;
  m.f_.reserve(f_.size() + o.f_.size());
  std::size_t i = 0, j = 0;
  while (i < f_.size() && j < o.f_.size()) {
    int c = compare(f_[i].first, o.f_[j].first);
    if (c == 0) {
      int e = f_[i].second + o.f_[j].second;
      if (e != 0) m.f_.emplace_back(f_[i].first, e);
      ++i;
      ++j;
    } else if (c < 0) {
      m.f_.push_back(f_[i++]);
    } else {
      m.f_.push_back(o.f_[j++]);
    }
  }
  for (; i < f_.size(); ++i) m.f_.push_back(f_[i]);
  for (; j < o.f_.size(); ++j) m.f_.push_back(o.f_[j]);
  m.deg_ = deg_ + o.deg_;
  return m;
}

std::optional<Monomial> Monomial::divide(const Monomial& o) const {
  Monomial m;
  std::size_t i = 0, j = 0;
  while (j < o.f_.size()) {
    if (i == f_.size()) return std::nullopt;
    int c = compare(f_[i].first, o.f_[j].first);
    if (c == 0) {
      int e = f_[i].second - o.f_[j].second;
      if (e < 0) return std::nullopt;
      if (e > 0) m.f_.emplace_back(f_[i].first, e);
      ++i;
      ++j;
    } else if (c < 0) {
      m.f_.push_back(f_[i++]);
    } else {
      return std::nullopt;
    }
  }
  for (; i < f_.size(); ++i) m.f_.push_back(f_[i]);
  m.deg_ = deg_ - o.deg_;
  return m;
}

Monomial Monomial::without(const Atom& a) const {
  Monomial m;
  for (const auto& fe : f_)
    if (compare(fe.first, a) != 0) m.f_.push_back(fe);
  m.deg_ = 0;
  for (const auto& [b, e] : m.f_) m.deg_ += e;
  return m;
}

Monomial Monomial::gcd(const Monomial& a, const Monomial& b) {
  Monomial m;
  std::size_t i = 0, j = 0;
  while (i < a.f_.size() && j < b.f_.size()) {
    int c = compare(a.f_[i].first, b.f_[j].first);
    if (c == 0) {
      m.f_.emplace_back(a.f_[i].first, std::min(a.f_[i].second, b.f_[j].second));
      m.deg_ += m.f_.back().second;
      ++i;
      ++j;
    } else if (c < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return m;
}

int compare(const Monomial& a, const Monomial& b) {
  if (a.degree() != b.degree()) return a.degree() < b.degree() ? -1 : 1;
  const auto& fa = a.factors();
  const auto& fb = b.factors();
  std::size_t i = 0, j = 0;
  while (i < fa.size() && j < fb.size()) {
    int c = compare(fa[i].first, fb[j].first);
    if (c == 0) {
      if (fa[i].second != fb[j].second) return fa[i].second < fb[j].second ? -1 : 1;
      ++i;
      ++j;
    } else {
      // the side holding the smaller atom has a positive exponent where the other has zero
      return c < 0 ? 1 : -1;
    }
  }
  if (i < fa.size()) return 1;
  if (j < fb.size()) return -1;
  return 0;
}

// ---------------------------------------------------------------- Poly

Poly::Poly(const Rational& c) {
  if (c != 0) t_.push_back(Term{Monomial(), c});
}

Poly::Poly(Atom a, int e) { t_.push_back(Term{Monomial(std::move(a), e), Rational(1)}); }

Poly::Poly(Monomial m, Rational c) {
  if (c != 0) t_.push_back(Term{std::move(m), std::move(c)});
}

Poly Poly::from_terms(std::vector<Term> terms) {
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return symexpr::compare(a.mono, b.mono) > 0; });
  Poly p;
  p.t_.reserve(terms.size());
  for (auto& t : terms) {
    if (!p.t_.empty() && symexpr::compare(p.t_.back().mono, t.mono) == 0) {
      p.t_.back().coef += t.coef;
    } else {
      if (!p.t_.empty() && p.t_.back().coef == 0) p.t_.pop_back();
      p.t_.push_back(std::move(t));
    }
  }
  if (!p.t_.empty() && p.t_.back().coef == 0) p.t_.pop_back();
  return p;
}

Poly Poly::from_sorted(std::vector<Term> terms) {
  Poly p;
  p.t_ = std::move(terms);
  return p;
}

Poly Poly::partial(const Atom& a) const {
  std::vector<Term> out;
  for (const auto& t : t_) {
    const auto& fs = t.mono.factors();
    for (std::size_t i = 0; i < fs.size(); ++i) {
      int c = symexpr::compare(fs[i].first, a);
      if (c > 0) break;
      if (c == 0) {
        std::vector<Monomial::Factor> nf = fs;
        int e = nf[i].second;
        if (e == 1) nf.erase(nf.begin() + static_cast<long>(i));
        else nf[i].second = e - 1;
        Monomial m;
        m.set_factors(std::move(nf));
        out.push_back(Term{std::move(m), t.coef * e});
        break;
      }
    }
  }
  return from_sorted(std::move(out));
}

Rational Poly::constant_value() const {
  if (t_.empty()) return Rational(0);
  assert(t_.size() == 1 && t_[0].mono.is_one());
  return t_[0].coef;
}

Poly Poly::operator+(const Poly& o) const {
  Poly r;
  r.t_.reserve(t_.size() + o.t_.size());
  std::size_t i = 0, j = 0;
  while (i < t_.size() && j < o.t_.size()) {
    int c = symexpr::compare(t_[i].mono, o.t_[j].mono);
    if (c == 0) {
      Rational s = t_[i].coef + o.t_[j].coef;
      if (s != 0) r.t_.push_back(Term{t_[i].mono, std::move(s)});
      ++i;
      ++j;
    } else if (c > 0) {
      r.t_.push_back(t_[i++]);
    } else {
      r.t_.push_back(o.t_[j++]);
    }
  }
  for (; i < t_.size(); ++i) r.t_.push_back(t_[i]);
  for (; j < o.t_.size(); ++j) r.t_.push_back(o.t_[j]);
  return r;
}

Poly& Poly::operator+=(const Poly& o) {
  *this = *this + o;
  return *this;
}

Poly Poly::operator-() const {
  Poly r = *this;
  for (auto& t : r.t_) t.coef = -t.coef;
  return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator*(const Rational& c) const {
  if (c == 0) return Poly();
  Poly r = *this;
  for (auto& t : r.t_) t.coef *= c;
  return r;
}

Poly Poly::operator*(const Monomial& m) const {
  Poly r;
  r.t_.reserve(t_.size());
  for (const auto& t : t_) r.t_.push_back(Term{t.mono * m, t.coef});
  return r;  // multiplying by a monomial preserves the order
}

Poly Poly::operator*(const Poly& o) const {
  if (is_zero() || o.is_zero()) return Poly();
  if (o.is_constant()) return *this * o.constant_value();
  if (is_constant()) return o * constant_value();
  if (o.t_.size() == 1) return (*this * o.t_[0].mono) * o.t_[0].coef;
  if (t_.size() == 1) return (o * t_[0].mono) * t_[0].coef;
  std::vector<Term> terms;
  terms.reserve(t_.size() * o.t_.size());
  for (const auto& a : t_)
    for (const auto& b : o.t_) terms.push_back(Term{a.mono * b.mono, a.coef * b.coef});
  return from_terms(std::move(terms));
}

Poly Poly::pow(unsigned n) const {
  Poly result(Rational(1));
  Poly base = *this;
  while (n) {
    if (n & 1u) result = result * base;
    n >>= 1u;
    if (n) base = base * base;
  }
  return result;
}

bool Poly::has_radicals() const {
  for (const auto& t : t_)
    for (const auto& [a, e] : t.mono.factors())
      if (a->kind == AtomKind::Radical) return true;
  return false;
}

bool Poly::has_functions() const {
  for (const auto& t : t_)
    for (const auto& [a, e] : t.mono.factors())
      if (a->kind == AtomKind::Function) return true;
  return false;
}

Poly Poly::reduce_radicals() const {
  Poly cur = *this;
  for (;;) {
    bool any = false;
    for (const auto& t : cur.t_) {
      for (const auto& [a, e] : t.mono.factors())
        if (a->kind == AtomKind::Radical && e >= 2) any = true;
      if (any) break;
    }
    if (!any) return cur;
    std::vector<Term> keep;
    Poly extra;
    for (const auto& t : cur.t_) {
      std::vector<Monomial::Factor> fs;
      Poly mult(Rational(1));
      bool changed = false;
      for (const auto& [a, e] : t.mono.factors()) {
        if (a->kind == AtomKind::Radical && e >= 2) {
          mult = mult * a->radicand->pow(static_cast<unsigned>(e / 2));
          changed = true;
          if (e % 2) fs.emplace_back(a, 1);
        } else {
          fs.emplace_back(a, e);
        }
      }
      if (!changed) {
        keep.push_back(t);
        continue;
      }
      Monomial m;
      m.set_factors(std::move(fs));
      extra += (mult * m) * t.coef;
    }
    cur = from_terms(std::move(keep)) + extra;
  }
}

AtomSet Poly::atoms() const {
  AtomSet s;
  for (const auto& t : t_)
    for (const auto& [a, e] : t.mono.factors()) s.insert(a);
  return s;
}

int Poly::degree_in(const Atom& a) const {
  int d = 0;
  for (const auto& t : t_) d = std::max(d, t.mono.exponent(a));
  return d;
}

std::map<int, Poly> Poly::coefficients_in(const Atom& a) const {
  std::map<int, std::vector<Term>> buckets;
  for (const auto& t : t_) {
    int e = t.mono.exponent(a);
    buckets[e].push_back(Term{e ? t.mono.without(a) : t.mono, t.coef});
  }
  std::map<int, Poly> out;
  for (auto& [e, ts] : buckets) out[e] = from_terms(std::move(ts));
  return out;
}

Poly Poly::substitute(const Atom& a, const Poly& value) const {
  Poly r;
  std::map<int, Poly> powers;
  for (auto& [e, c] : coefficients_in(a)) {
    if (e == 0) {
      r += c;
      continue;
    }
    auto it = powers.find(e);
    if (it == powers.end()) it = powers.emplace(e, value.pow(static_cast<unsigned>(e))).first;
    r += c * it->second;
  }
  return r;
}

Rational Poly::content() const {
  if (t_.empty()) return Rational(0);
  Integer num = 0, den = 1;
  for (const auto& t : t_) {
    mpz_gcd(num.get_mpz_t(), num.get_mpz_t(), t.coef.get_num_mpz_t());
    mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), t.coef.get_den_mpz_t());
  }
  Rational c(num, den);
  c.canonicalize();
  return c;
}

Monomial Poly::monomial_content() const {
  if (t_.empty()) return Monomial();
  Monomial m = t_[0].mono;
  for (std::size_t i = 1; i < t_.size() && !m.is_one(); ++i) m = Monomial::gcd(m, t_[i].mono);
  return m;
}

Poly Poly::primitive() const {
  if (t_.empty()) return Poly();
  Rational c = content();
  if (t_[0].coef < 0) c = -c;
  if (c == 1) return *this;
  Rational inv = 1 / c;
  return *this * inv;
}

Poly Poly::monic() const {
  if (t_.empty()) return Poly();
  Rational inv = 1 / t_[0].coef;
  return *this * inv;
}

int Poly::compare(const Poly& o) const {
  std::size_t n = std::min(t_.size(), o.t_.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = symexpr::compare(t_[i].mono, o.t_[i].mono);
    if (c) return c;
    int d = cmp(t_[i].coef, o.t_[i].coef);
    if (d) return d < 0 ? -1 : 1;
  }
  if (t_.size() != o.t_.size()) return t_.size() < o.t_.size() ? -1 : 1;
  return 0;
}

// ---------------------------------------------------------------- division

std::optional<Poly> divide_exact(const Poly& f, const Poly& g) {
  if (g.is_zero()) return std::nullopt;
  if (f.is_zero()) return Poly();
  if (g.is_constant()) return f * (1 / g.constant_value());
  if (g.is_monomial()) {
    std::vector<Term> q;
    Rational inv = 1 / g.leading().coef;
    for (const auto& t : f.terms()) {
      auto m = t.mono.divide(g.leading().mono);
      if (!m) return std::nullopt;
      q.push_back(Term{std::move(*m), t.coef * inv});
    }
    return Poly::from_terms(std::move(q));
  }
  const Term& lg = g.leading();
  Rational inv = 1 / lg.coef;
  std::vector<Term> q;
  Poly r = f;
  while (!r.is_zero()) {
    const Term& lr = r.leading();
    auto m = lr.mono.divide(lg.mono);
    if (!m) return std::nullopt;
    Term t{std::move(*m), lr.coef * inv};
    r = r - (g * t.mono) * t.coef;
    q.push_back(std::move(t));
  }
  return Poly::from_terms(std::move(q));
}

namespace {

Integer max_norm(const Poly& p) {
  Integer m = 0;
  for (const auto& t : p.terms()) {
    Integer a = abs(t.coef.get_num());
    if (a > m) m = a;
  }
  return m;
}

Integer int_content(const Poly& p) {
  Integer g = 0;
  for (const auto& t : p.terms()) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), t.coef.get_num_mpz_t());
  return g;
}

Poly eval_at(const Poly& f, const Atom& x, const Integer& xi) {
  std::vector<Term> ts;
  ts.reserve(f.size());
  std::map<int, Integer> pw;
  for (const auto& t : f.terms()) {
    int e = t.mono.exponent(x);
    if (e == 0) {
      ts.push_back(t);
      continue;
    }
    auto it = pw.find(e);
    if (it == pw.end()) {
      Integer v;
      mpz_pow_ui(v.get_mpz_t(), xi.get_mpz_t(), static_cast<unsigned long>(e));
      it = pw.emplace(e, v).first;
    }
    ts.push_back(Term{t.mono.without(x), t.coef * Rational(it->second)});
  }
  return Poly::from_terms(std::move(ts));
}

Integer symmetric_mod(const Integer& a, const Integer& m) {
  Integer r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  if (2 * r > m) r -= m;
  return r;
}

Poly interpolate(Poly h, const Atom& x, const Integer& xi) {
  std::vector<Term> out;
  int i = 0;
  while (!h.is_zero()) {
    std::vector<Term> g;
    for (const auto& t : h.terms()) {
      Integer r = symmetric_mod(t.coef.get_num(), xi);
      if (r != 0) g.push_back(Term{t.mono, Rational(r)});
    }
    Poly gp = Poly::from_terms(g);
    for (const auto& t : gp.terms()) out.push_back(Term{t.mono * Monomial(x, i), t.coef});
    h = (h - gp) * Rational(Integer(1), xi);
    ++i;
    if (i > 100000) break;
  }
  return Poly::from_terms(std::move(out));
}

std::optional<Poly> heugcd(const Poly& f, const Poly& g, int depth);

// gcd over Z including integer content, both arguments nonzero integer polys
Poly zgcd(const Poly& f, const Poly& g, int depth) {
  if (f.is_constant() || g.is_constant()) {
    Integer a = int_content(f), b = int_content(g), c;
    mpz_gcd(c.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return Poly(Rational(c));
  }
  if (auto h = heugcd(f, g, depth)) return *h;
  // fall back to the generic routine and restore the integer content
  Integer a = int_content(f), b = int_content(g), c;
  mpz_gcd(c.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return gcd(f, g) * Rational(c);
}

std::optional<Poly> heugcd(const Poly& f0, const Poly& g0, int depth) {
  if (depth > 64) return std::nullopt;
  Integer cf = int_content(f0), cg = int_content(g0), c;
  mpz_gcd(c.get_mpz_t(), cf.get_mpz_t(), cg.get_mpz_t());
  Poly f = f0 * Rational(Integer(1), cf);
  Poly g = g0 * Rational(Integer(1), cg);
  if (f.is_constant() || g.is_constant()) return Poly(Rational(c));

  AtomSet all = f.atoms();
  for (const auto& a : g.atoms()) all.insert(a);
  Atom x = *all.begin();

  Integer fn = max_norm(f), gn = max_norm(g);
  Integer xi = 2 * std::min(fn, gn) + 29;
  for (int attempt = 0; attempt < 6; ++attempt) {
    Poly ff = eval_at(f, x, xi);
    Poly gg = eval_at(g, x, xi);
    if (!ff.is_zero() && !gg.is_zero()) {
      Poly h = zgcd(ff, gg, depth + 1);
      Poly cand = interpolate(h, x, xi).primitive();
      if (!cand.is_zero()) {
        if (divide_exact(f, cand) && divide_exact(g, cand)) return cand * Rational(c);
      }
    }
    xi = xi * 73794 / 27011;
  }
  return std::nullopt;
}

// content with respect to a main atom, as a gcd of its coefficients
Poly content_in(const Poly& f, const Atom& x) {
  Poly c;
  for (auto& [e, coef] : f.coefficients_in(x)) {
    c = c.is_zero() ? coef.primitive() : gcd(c, coef);
    if (c.is_constant()) return Poly(Rational(1));
  }
  return c;
}

Poly prem(const Poly& f, const Poly& g, const Atom& x) {
  int dg = g.degree_in(x);
  auto gc = g.coefficients_in(x);
  Poly lc = gc.rbegin()->second;
  Poly r = f;
  int dr = r.degree_in(x);
  int steps = dr - dg + 1;
  while (!r.is_zero() && (dr = r.degree_in(x)) >= dg) {
    auto rc = r.coefficients_in(x);
    Poly lr = rc.rbegin()->second;
    r = r * lc - (g * lr) * Monomial(x, dr - dg);
    --steps;
  }
  if (steps > 0) r = r * lc.pow(static_cast<unsigned>(steps));
  return r;
}

Poly prs_gcd(const Poly& f0, const Poly& g0) {
  AtomSet all = f0.atoms();
  for (const auto& a : g0.atoms()) all.insert(a);
  Atom x = *all.begin();
  Poly cf = content_in(f0, x), cg = content_in(g0, x);
  Poly f = *divide_exact(f0, cf), g = *divide_exact(g0, cg);
  Poly c = gcd(cf, cg);
  if (f.degree_in(x) < g.degree_in(x)) std::swap(f, g);
  for (;;) {
    if (g.degree_in(x) == 0) return c.primitive();
    Poly r = prem(f, g, x);
    if (r.is_zero()) return (c * g).primitive();
    f = g;
    g = *divide_exact(r, content_in(r, x));
  }
}

}  // namespace

Poly gcd(const Poly& f0, const Poly& g0) {
  if (f0.is_zero()) return g0.primitive();
  if (g0.is_zero()) return f0.primitive();
  if (f0.is_constant() || g0.is_constant()) return Poly(Rational(1));

  Poly f = f0.primitive(), g = g0.primitive();
  Monomial mf = f.monomial_content(), mg = g.monomial_content();
  Monomial mc = Monomial::gcd(mf, mg);
  if (!mf.is_one()) f = *divide_exact(f, Poly(mf, 1));
  if (!mg.is_one()) g = *divide_exact(g, Poly(mg, 1));
  Poly mpoly(mc, Rational(1));
  if (f.is_monomial() || g.is_monomial()) return mpoly;
  if (f == g) return f * mc;

  // an atom present in only one argument can be split off through its coefficients
  AtomSet af = f.atoms(), ag = g.atoms();
  for (const auto& a : af) {
    if (!ag.count(a)) {
      Poly h = g;
      for (auto& [e, c] : f.coefficients_in(a)) {
        h = gcd(h, c);
        if (h.is_constant()) return mpoly;
      }
      return h * mc;
    }
  }
  for (const auto& a : ag) {
    if (!af.count(a)) {
      Poly h = f;
      for (auto& [e, c] : g.coefficients_in(a)) {
        h = gcd(h, c);
        if (h.is_constant()) return mpoly;
      }
      return h * mc;
    }
  }

  if (g.size() <= f.size()) {
    if (divide_exact(f, g)) return g * mc;
  } else {
    if (divide_exact(g, f)) return f * mc;
  }

  if (auto h = heugcd(f, g, 0)) return h->primitive() * mc;
  return prs_gcd(f, g) * mc;
}

}  // namespace mframe::symexpr
