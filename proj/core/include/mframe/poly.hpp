#pragma once

#include <gmpxx.h>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mframe/symbol.hpp"

namespace mframe::symexpr {

using Rational = mpq_class;
using Integer = mpz_class;

class Expr;
class Poly;

enum class AtomKind : std::uint8_t { Symbol = 0, Radical = 1, Function = 2 };
enum class Func : std::uint8_t { Sin = 0, Cos = 1, Tanh = 2, Sech = 3, Atan = 4 };

std::string func_name(Func f);

struct AtomNode {
  AtomKind kind;
  Symbol sym;                            // Symbol
  std::shared_ptr<const Poly> radicand;  // Radical: sqrt(radicand)
  Func fn = Func::Sin;                   // Function
  std::shared_ptr<const Expr> arg;
};

using Atom = std::shared_ptr<const AtomNode>;

Atom make_symbol_atom(const Symbol& s);
Atom make_radical_atom(Poly radicand);
Atom make_function_atom(Func f, Expr arg);

int compare(const Atom& a, const Atom& b);

struct AtomLess {
  bool operator()(const Atom& a, const Atom& b) const { return compare(a, b) < 0; }
};

using AtomSet = std::set<Atom, AtomLess>;

class Monomial {
 public:
  using Factor = std::pair<Atom, int>;

  Monomial() = default;
  explicit Monomial(Atom a, int e = 1);

  const std::vector<Factor>& factors() const { return f_; }
  int degree() const { return deg_; }
  bool is_one() const { return f_.empty(); }
  int exponent(const Atom& a) const;

  Monomial operator*(const Monomial& o) const;
  std::optional<Monomial> divide(const Monomial& o) const;
  Monomial without(const Atom& a) const;
  static Monomial gcd(const Monomial& a, const Monomial& b);

  void set_factors(std::vector<Factor> f);

 private:
  std::vector<Factor> f_;
  int deg_ = 0;
};

// Graded order: total degree first, then lexicographic in atom order.
int compare(const Monomial& a, const Monomial& b);

struct Term {
  Monomial mono;
  Rational coef;
};

// Sparse polynomial over Q in atoms, terms sorted by decreasing monomial.
class Poly {
 public:
  Poly() = default;
  explicit Poly(const Rational& c);
  explicit Poly(Atom a, int e = 1);
  Poly(Monomial m, Rational c);

  static Poly from_terms(std::vector<Term> terms);  // sorts and combines
  static Poly from_sorted(std::vector<Term> terms);  // already ordered, no duplicates

  const std::vector<Term>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  bool is_constant() const { return t_.empty() || (t_.size() == 1 && t_[0].mono.is_one()); }
  bool is_monomial() const { return t_.size() == 1; }
  Rational constant_value() const;  // requires is_constant
  const Term& leading() const { return t_.front(); }
  std::size_t size() const { return t_.size(); }

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator-() const;
  Poly operator*(const Poly& o) const;
  Poly operator*(const Rational& c) const;
  Poly operator*(const Monomial& m) const;
  Poly& operator+=(const Poly& o);
  Poly pow(unsigned n) const;

  // square-root atoms with exponent >= 2 are replaced by their radicands
  Poly reduce_radicals() const;
  bool has_radicals() const;
  bool has_functions() const;

  AtomSet atoms() const;
  Poly partial(const Atom& a) const;  // formal derivative in an atom
  int degree_in(const Atom& a) const;
  std::map<int, Poly> coefficients_in(const Atom& a) const;
  Poly substitute(const Atom& a, const Poly& value) const;

  Rational content() const;  // positive rational gcd of coefficients
  Monomial monomial_content() const;
  // integer coefficients, content 1, positive leading coefficient
  Poly primitive() const;
  Poly monic() const;  // leading coefficient 1

  int compare(const Poly& o) const;
  bool operator==(const Poly& o) const { return compare(o) == 0; }
  bool operator!=(const Poly& o) const { return compare(o) != 0; }

 private:
  std::vector<Term> t_;
};

std::optional<Poly> divide_exact(const Poly& f, const Poly& g);
// gcd over Q[atoms], returned primitive with positive leading coefficient
Poly gcd(const Poly& f, const Poly& g);

}  // namespace mframe::symexpr
