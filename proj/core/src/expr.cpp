#include "mframe/expr.hpp"

#include <algorithm>

#include "mframe/format.hpp"

namespace mframe::symexpr {

namespace {

int radical_depth(const Atom& a);

int poly_radical_depth(const Poly& p) {
  int d = 0;
  for (const auto& t : p.terms())
    for (const auto& [a, e] : t.mono.factors()) d = std::max(d, radical_depth(a));
  return d;
}

int radical_depth(const Atom& a) {
  if (a->kind != AtomKind::Radical) return 0;
  return 1 + poly_radical_depth(*a->radicand);
}

Poly mul_reduced(const Poly& a, const Poly& b) {
  Poly p = a * b;
  return p.has_radicals() ? p.reduce_radicals() : p;
}

Poly div_exact_or_throw(const Poly& a, const Poly& b) {
  auto q = divide_exact(a, b);
  if (!q) throw std::logic_error("internal: inexact polynomial division");
  return *q;
}

}  // namespace

Expr::Expr() : d_(std::make_shared<const Data>(Data{Poly(), Poly(Rational(1))})) {}
Expr::Expr(int v) : Expr(Rational(v)) {}
Expr::Expr(long v) : Expr(Rational(v)) {}
Expr::Expr(const Rational& q) : d_(std::make_shared<const Data>(Data{Poly(q), Poly(Rational(1))})) {}
Expr::Expr(const Symbol& s)
    : d_(std::make_shared<const Data>(Data{Poly(make_symbol_atom(s)), Poly(Rational(1))})) {}
Expr::Expr(Atom a) : d_(std::make_shared<const Data>(Data{Poly(std::move(a)), Poly(Rational(1))})) {}

Expr Expr::raw(Poly num, Poly den) {
  return Expr(std::make_shared<const Data>(Data{std::move(num), std::move(den)}));
}

Expr Expr::polynomial(Poly p) {
  if (p.has_radicals()) p = p.reduce_radicals();
  return raw(std::move(p), Poly(Rational(1)));
}

Expr Expr::fraction(Poly num, Poly den) {
  if (den.is_zero()) throw DivisionByZero();
  if (num.has_radicals()) num = num.reduce_radicals();
  if (den.has_radicals()) den = den.reduce_radicals();
  if (num.is_zero()) return Expr();
  while (den.has_radicals()) {
    Atom r;
    int best = -1;
    for (const auto& a : den.atoms()) {
      if (a->kind != AtomKind::Radical) continue;
      int d = radical_depth(a);
      if (d > best) {
        best = d;
        r = a;
      }
    }
    auto cs = den.coefficients_in(r);
    Poly A = cs.count(0) ? cs[0] : Poly();
    Poly B = cs.count(1) ? cs[1] : Poly();
    Poly conj = A - B * Poly(r);
    num = mul_reduced(num, conj);
    den = (A * A - B * B * *r->radicand).reduce_radicals();
    if (den.is_zero()) throw DivisionByZero();
  }
  if (den.is_constant()) {
    Rational c = den.constant_value();
    return raw(num * Rational(1 / c), Poly(Rational(1)));
  }
  Poly g = gcd(num, den);
  if (!g.is_constant()) {
    num = div_exact_or_throw(num, g);
    den = div_exact_or_throw(den, g);
  }
  Rational c = den.content();
  if (den.leading().coef < 0) c = -c;
  if (c != 1) {
    Rational inv = 1 / c;
    num = num * inv;
    den = den * inv;
  }
  if (den.is_constant()) return raw(std::move(num), Poly(Rational(1)));
  return raw(std::move(num), std::move(den));
}

Rational Expr::constant_value() const { return num().constant_value() / den().constant_value(); }

std::optional<Symbol> Expr::as_symbol() const {
  if (!den().is_constant() || den().constant_value() != 1) return std::nullopt;
  if (num().size() != 1) return std::nullopt;
  const auto& t = num().leading();
  if (t.coef != 1 || t.mono.factors().size() != 1) return std::nullopt;
  const auto& [a, e] = t.mono.factors()[0];
  if (e != 1 || a->kind != AtomKind::Symbol) return std::nullopt;
  return a->sym;
}

bool Expr::is_rational_fragment() const {
  for (const auto& a : atoms())
    if (a->kind != AtomKind::Symbol) return false;
  return true;
}

Expr Expr::operator-() const { return raw(-num(), den()); }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.is_polynomial() && b.is_polynomial()) return Expr::raw(a.num() + b.num(), Poly(Rational(1)));
  if (a.den() == b.den()) return Expr::fraction(a.num() + b.num(), a.den());
  if (a.is_polynomial()) return Expr::raw(a.num() * b.den() + b.num(), b.den());
  if (b.is_polynomial()) return Expr::raw(a.num() + b.num() * a.den(), a.den());
  Poly g = gcd(a.den(), b.den());
  if (g.is_constant()) {
    return Expr::raw(a.num() * b.den() + b.num() * a.den(), a.den() * b.den());
  }
  Poly ad = div_exact_or_throw(a.den(), g);
  Poly bd = div_exact_or_throw(b.den(), g);
  Poly n = a.num() * bd + b.num() * ad;
  Poly d = a.den() * bd;
  if (n.is_zero()) return Expr();
  Poly h = gcd(n, g);
  if (!h.is_constant()) {
    n = div_exact_or_throw(n, h);
    d = div_exact_or_throw(d, h);
  }
  if (d.is_constant()) return Expr::raw(n * Rational(1 / d.constant_value()), Poly(Rational(1)));
  return Expr::raw(std::move(n), std::move(d));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_constant() && a.constant_value() == 1) return b;
  if (b.is_constant() && b.constant_value() == 1) return a;
  bool ra = a.num().has_radicals(), rb = b.num().has_radicals();
  if (ra && rb) return Expr::fraction(a.num() * b.num(), a.den() * b.den());
  if (a.is_constant()) return Expr::raw(b.num() * a.constant_value(), b.den());
  if (b.is_constant()) return Expr::raw(a.num() * b.constant_value(), a.den());
  Poly n1 = a.num(), n2 = b.num(), d1 = a.den(), d2 = b.den();
  if (!d2.is_constant()) {
    Poly g = gcd(n1, d2);
    if (!g.is_constant()) {
      n1 = div_exact_or_throw(n1, g);
      d2 = div_exact_or_throw(d2, g);
    }
  }
  if (!d1.is_constant()) {
    Poly g = gcd(n2, d1);
    if (!g.is_constant()) {
      n2 = div_exact_or_throw(n2, g);
      d1 = div_exact_or_throw(d1, g);
    }
  }
  Poly d = d1 * d2;
  if (d.is_constant()) return Expr::raw(n1 * n2 * Rational(1 / d.constant_value()), Poly(Rational(1)));
  return Expr::raw(n1 * n2, std::move(d));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) throw DivisionByZero();
  if (a.is_zero()) return Expr();
  if (b.is_constant()) return Expr::raw(a.num() * Rational(1 / b.constant_value()), a.den());
  return a * Expr::fraction(b.den(), b.num());
}

Expr Expr::pow(long n) const {
  if (n == 0) return Expr(1);
  if (n < 0) {
    if (is_zero()) throw DivisionByZero();
    return Expr::fraction(den(), num()).pow(-n);
  }
  if (n == 1) return *this;
  auto k = static_cast<unsigned>(n);
  if (num().has_radicals()) return Expr::fraction(num().pow(k), den().pow(k));
  return raw(num().pow(k), den().pow(k));
}

int Expr::compare(const Expr& o) const {
  if (d_ == o.d_) return 0;
  int c = num().compare(o.num());
  if (c) return c;
  return den().compare(o.den());
}

namespace {
void collect_symbols(const AtomSet& atoms, std::set<Symbol>& out) {
  for (const auto& a : atoms) {
    switch (a->kind) {
      case AtomKind::Symbol: out.insert(a->sym); break;
      case AtomKind::Radical: collect_symbols(a->radicand->atoms(), out); break;
      case AtomKind::Function: {
        auto s = a->arg->free_symbols();
        out.insert(s.begin(), s.end());
        break;
      }
    }
  }
}
}  // namespace

AtomSet Expr::atoms() const {
  AtomSet s = num().atoms();
  for (const auto& a : den().atoms()) s.insert(a);
  return s;
}

std::set<Symbol> Expr::free_symbols() const {
  std::set<Symbol> out;
  collect_symbols(atoms(), out);
  return out;
}

bool Expr::depends_on(const Symbol& s) const { return free_symbols().count(s) > 0; }

bool Expr::depends_on_kind(SymbolKind k) const {
  for (const auto& s : free_symbols())
    if (s.kind == k) return true;
  return false;
}

std::string Expr::str() const { return to_text(*this); }

// ---------------------------------------------------------------- powers, roots, functions

namespace {

// n = s^2 t with t having no small square factors; perfect-square remainders are absorbed
void split_square(const Integer& n0, Integer& s, Integer& t) {
  s = 1;
  t = 1;
  Integer n = abs(n0);
  for (unsigned long p = 2; p < 1000 && p * p <= n; ++p) {
    Integer pp = p * p;
    while (mpz_divisible_p(n.get_mpz_t(), pp.get_mpz_t())) {
      n /= pp;
      s *= p;
    }
    if (mpz_divisible_p(n.get_mpz_t(), Integer(p).get_mpz_t())) {
      n /= p;
      t *= p;
    }
  }
  if (mpz_perfect_square_p(n.get_mpz_t())) {
    Integer r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    s *= r;
  } else {
    t *= n;
  }
  if (n0 < 0) t = -t;
}

Expr radical_of(const Poly& radicand) { return Expr(make_radical_atom(radicand)); }

Expr sqrt_rational(const Rational& q) {
  if (q == 0) return Expr();
  Integer n = q.get_num() * q.get_den();
  Integer s, t;
  split_square(n, s, t);
  Expr out(Rational(s, q.get_den()));
  if (t != 1) out = out * radical_of(Poly(Rational(t)));
  return out;
}

std::optional<Poly> poly_sqrt(const Poly& q) {
  const Term& lt = q.leading();
  if (lt.coef <= 0) return std::nullopt;
  if (!mpz_perfect_square_p(lt.coef.get_num_mpz_t()) || !mpz_perfect_square_p(lt.coef.get_den_mpz_t()))
    return std::nullopt;
  std::vector<Monomial::Factor> fs;
  for (const auto& [a, e] : lt.mono.factors()) {
    if (e % 2) return std::nullopt;
    fs.emplace_back(a, e / 2);
  }
  Integer rn, rd;
  mpz_sqrt(rn.get_mpz_t(), lt.coef.get_num_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), lt.coef.get_den_mpz_t());
  Monomial m;
  m.set_factors(std::move(fs));
  Term lead{m, Rational(rn, rd)};
  Poly s(lead.mono, lead.coef);
  Poly r = q - s * s;
  for (std::size_t it = 0; it < q.size() + 4 && !r.is_zero(); ++it) {
    const Term& lr = r.leading();
    auto mm = lr.mono.divide(lead.mono);
    if (!mm) return std::nullopt;
    Poly t(*mm, lr.coef / (2 * lead.coef));
    r = r - (s * t) * Rational(2) - t * t;
    s = s + t;
  }
  if (!r.is_zero()) return std::nullopt;
  return s;
}

Expr sqrt_poly(const Poly& p) {
  if (p.is_zero()) return Expr();
  if (p.is_constant()) return sqrt_rational(p.constant_value());
  Rational c = p.content();
  Monomial m = p.monomial_content();
  Poly q = p * Rational(1 / c);
  if (!m.is_one()) q = *divide_exact(q, Poly(m, Rational(1)));
  Expr out = sqrt_rational(c);
  for (const auto& [a, e] : m.factors()) {
    Expr f = Expr(a).pow(e / 2);
    if (e % 2) f = f * radical_of(Poly(a));
    out = out * f;
  }
  if (q.is_constant()) {
    if (q.constant_value() == -1) out = out * radical_of(q);
    return out;
  }
  if (auto s = poly_sqrt(q)) return out * Expr::polynomial(*s);
  return out * radical_of(q);
}

bool is_odd(Func f) { return f == Func::Sin || f == Func::Tanh || f == Func::Atan; }

}  // namespace

Expr sqrt(const Expr& e) {
  if (e.is_zero()) return Expr();
  Expr n = sqrt_poly(e.num());
  if (e.is_polynomial()) return n;
  return n / sqrt_poly(e.den());
}

Expr pow(const Expr& base, const Rational& exponent) {
  if (exponent.get_den() == 1) return base.pow(exponent.get_num().get_si());
  if (exponent.get_den() == 2) {
    long p = exponent.get_num().get_si();
    Expr r = sqrt(base);
    return r.pow(p);
  }
  throw std::domain_error("unsupported exponent " + exponent.get_str() + " (integer or half-integer only)");
}

Expr apply_function(Func f, const Expr& e) {
  if (e.is_zero()) return (f == Func::Cos || f == Func::Sech) ? Expr(1) : Expr();
  if (e.num().leading().coef < 0) {
    Expr inner = apply_function(f, -e);
    return is_odd(f) ? -inner : inner;
  }
  if (f == Func::Sin || f == Func::Cos) {
    // sin(atan z) and cos(atan z) have algebraic closed forms
    if (e.is_polynomial() && e.num().size() == 1 && e.num().leading().coef == 1 &&
        e.num().leading().mono.factors().size() == 1) {
      const auto& [a, k] = e.num().leading().mono.factors()[0];
      if (k == 1 && a->kind == AtomKind::Function && a->fn == Func::Atan) {
        const Expr& z = *a->arg;
        Expr root = sqrt(Expr(1) + z * z);
        return f == Func::Sin ? z / root : Expr(1) / root;
      }
    }
  }
  return Expr(make_function_atom(f, e));
}

Expr sin(const Expr& e) { return apply_function(Func::Sin, e); }
Expr cos(const Expr& e) { return apply_function(Func::Cos, e); }
Expr tanh(const Expr& e) { return apply_function(Func::Tanh, e); }
Expr sech(const Expr& e) { return apply_function(Func::Sech, e); }
Expr atan(const Expr& e) { return apply_function(Func::Atan, e); }

// ---------------------------------------------------------------- derivations

namespace {

struct Deriver {
  const SymbolDerivative& cb;
  std::map<Atom, Expr, AtomLess> cache;

  Expr atom(const Atom& a) {
    auto it = cache.find(a);
    if (it != cache.end()) return it->second;
    Expr r;
    switch (a->kind) {
      case AtomKind::Symbol:
        r = cb(a->sym);
        break;
      case AtomKind::Radical: {
        Expr dp = poly(*a->radicand);
        if (!dp.is_zero()) r = dp * Expr(a) / (Expr(2) * Expr::polynomial(*a->radicand));
        break;
      }
      case AtomKind::Function: {
        const Expr& u = *a->arg;
        Expr du = expr(u);
        if (du.is_zero()) break;
        switch (a->fn) {
          case Func::Sin: r = cos(u) * du; break;
          case Func::Cos: r = -sin(u) * du; break;
          case Func::Tanh: r = sech(u).pow(2) * du; break;
          case Func::Sech: r = -(sech(u) * tanh(u)) * du; break;
          case Func::Atan: r = du / (Expr(1) + u * u); break;
        }
        break;
      }
    }
    cache.emplace(a, r);
    return r;
  }

  Expr poly(const Poly& p) {
    Poly acc;
    Expr rest;
    for (const auto& a : p.atoms()) {
      Expr da = atom(a);
      if (da.is_zero()) continue;
      Poly dp = p.partial(a);
      if (da.is_polynomial()) {
        acc += dp * da.num();
      } else {
        rest += Expr::polynomial(dp) * da;
      }
    }
    return Expr::polynomial(std::move(acc)) + rest;
  }

  Expr expr(const Expr& e) {
    if (e.is_constant()) return Expr();
    Expr dn = poly(e.num());
    if (e.is_polynomial()) return dn;
    Expr dd = poly(e.den());
    Expr den = Expr::polynomial(e.den());
    if (dd.is_zero()) return dn / den;
    Expr num = Expr::polynomial(e.num());
    return (dn * den - num * dd) / (den * den);
  }
};

}  // namespace

Expr derivation(const Expr& e, const SymbolDerivative& on_symbol) {
  Deriver d{on_symbol, {}};
  return d.expr(e);
}

Expr diff(const Expr& e, const Symbol& s) {
  if (!e.depends_on(s)) return Expr();
  return derivation(e, [&](const Symbol& t) { return t == s ? Expr(1) : Expr(); });
}

Expr canonical(const Expr& e) { return Expr::fraction(e.num(), e.den()); }

// ---------------------------------------------------------------- substitution

namespace {

struct Substituter {
  const Bindings& b;
  std::map<Atom, std::optional<Expr>, AtomLess> cache;

  std::optional<Expr> atom(const Atom& a) {
    auto it = cache.find(a);
    if (it != cache.end()) return it->second;
    std::optional<Expr> r;
    switch (a->kind) {
      case AtomKind::Symbol: {
        auto f = b.find(a->sym);
        if (f != b.end()) r = f->second;
        break;
      }
      case AtomKind::Radical: {
        auto v = poly_value(*a->radicand);
        if (v) r = sqrt(*v);
        break;
      }
      case AtomKind::Function: {
        auto v = expr(*a->arg);
        if (v) r = apply_function(a->fn, *v);
        break;
      }
    }
    cache.emplace(a, r);
    return r;
  }

  // p evaluated under the bindings as (numerator, denominator), or nullopt if unchanged
  std::optional<std::pair<Poly, Poly>> poly(const Poly& p) {
    std::map<Atom, Expr, AtomLess> changed;
    for (const auto& a : p.atoms()) {
      auto v = atom(a);
      if (v) changed.emplace(a, *v);
    }
    if (changed.empty()) return std::nullopt;

    struct Info {
      int maxdeg = 0;
      std::vector<Poly> npow;  // n^k
      std::vector<Poly> dpow;  // d^k
    };
    std::map<Atom, Info, AtomLess> info;
    for (auto& [a, v] : changed) {
      Info in;
      in.maxdeg = p.degree_in(a);
      in.npow.push_back(Poly(Rational(1)));
      in.dpow.push_back(Poly(Rational(1)));
      for (int k = 1; k <= in.maxdeg; ++k) {
        in.npow.push_back(mul_reduced(in.npow.back(), v.num()));
        in.dpow.push_back(v.is_polynomial() ? Poly(Rational(1)) : in.dpow.back() * v.den());
      }
      info.emplace(a, std::move(in));
    }
    // common denominator: lcm over terms of prod_a d_a^e; each term is scaled by den / that product
    std::vector<std::vector<int>> keys;
    keys.reserve(p.size());
    std::map<std::vector<int>, Poly> scale;
    for (const auto& t : p.terms()) {
      std::vector<int> key;
      for (auto& [a, in] : info) key.push_back(t.mono.exponent(a));
      keys.push_back(key);
      scale.emplace(key, Poly());
    }
    Poly den(Rational(1));
    for (auto& [key, used] : scale) {
      used = Poly(Rational(1));
      std::size_t idx = 0;
      for (auto& [a, in] : info) {
        int e = key[idx++];
        if (e > 0 && !in.dpow[static_cast<std::size_t>(e)].is_constant()) used = used * in.dpow[static_cast<std::size_t>(e)];
      }
      if (used.is_constant()) continue;
      if (auto q = divide_exact(den, used)) continue;
      Poly g = gcd(den, used);
      den = g.is_constant() ? den * used : den * *divide_exact(used, g);
    }
    for (auto& [key, used] : scale) used = *divide_exact(den, used);

    Poly num;
    std::size_t ti = 0;
    for (const auto& t : p.terms()) {
      std::vector<Monomial::Factor> keep;
      Poly term(Rational(1));
      for (const auto& [a, e] : t.mono.factors()) {
        auto it = info.find(a);
        if (it == info.end()) keep.emplace_back(a, e);
        else term = mul_reduced(term, it->second.npow[static_cast<std::size_t>(e)]);
      }
      term = term * scale.at(keys[ti++]);
      Monomial km;
      km.set_factors(std::move(keep));
      num += (term * km) * t.coef;
    }
    if (num.has_radicals()) num = num.reduce_radicals();
    return std::make_pair(std::move(num), std::move(den));
  }

  std::optional<Expr> poly_value(const Poly& p) {
    auto v = poly(p);
    if (!v) return std::nullopt;
    return Expr::fraction(std::move(v->first), std::move(v->second));
  }

  std::optional<Expr> expr(const Expr& e) {
    auto n = poly(e.num());
    auto d = e.is_polynomial() ? std::nullopt : poly(e.den());
    if (!n && !d) return std::nullopt;
    Poly nn = n ? n->first : e.num(), nd = n ? n->second : Poly(Rational(1));
    Poly dn = d ? d->first : e.den(), dd = d ? d->second : Poly(Rational(1));
    return Expr::fraction(mul_reduced(nn, dd), mul_reduced(nd, dn));
  }
};

}  // namespace

Expr subst(const Expr& e, const Bindings& b) {
  if (b.empty()) return e;
  Substituter s{b, {}};
  auto r = s.expr(e);
  return r ? *r : e;
}

std::map<int, Expr> coefficients(const Expr& e, const Symbol& s) {
  auto reject = [&] { throw std::domain_error("expression is not polynomial in " + s.text()); };
  if (Expr::polynomial(e.den()).depends_on(s)) reject();
  Atom a = make_symbol_atom(s);
  std::map<int, Expr> out;
  for (auto& [k, c] : e.num().coefficients_in(a)) {
    for (const auto& at : c.atoms())
      if (at->kind != AtomKind::Symbol && Expr(at).depends_on(s)) reject();
    out[k] = Expr::fraction(c, e.den());
  }
  return out;
}

int degree(const Expr& e, const Symbol& s) {
  auto c = coefficients(e, s);
  return c.empty() ? 0 : c.rbegin()->first;
}

int max_order(const Expr& e, SymbolKind k, const std::string& name) {
  int best = -1;
  for (const auto& s : e.free_symbols())
    if (s.kind == k && s.name == name) best = std::max(best, s.deriv.order());
  return best;
}

}  // namespace mframe::symexpr
