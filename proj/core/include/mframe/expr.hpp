#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mframe/poly.hpp"
#include "mframe/symbol.hpp"

namespace mframe::symexpr {

class DivisionByZero : public std::domain_error {
 public:
  DivisionByZero() : std::domain_error("division by zero") {}
};

// Canonical rational function num/den over atoms. The denominator is free of
// square-root atoms, primitive with integer coefficients and positive leading
// coefficient; gcd(num, den) = 1.
class Expr {
 public:
  Expr();
  Expr(int v);  // NOLINT: implicit numeric conversion is part of the API
  Expr(long v);  // NOLINT
  Expr(const Rational& q);  // NOLINT
  explicit Expr(const Symbol& s);
  explicit Expr(Atom a);

  static Expr fraction(Poly num, Poly den);
  static Expr polynomial(Poly p);

  const Poly& num() const { return d_->num; }
  const Poly& den() const { return d_->den; }

  bool is_zero() const { return d_->num.is_zero(); }
  bool is_constant() const { return d_->num.is_constant() && d_->den.is_constant(); }
  bool is_polynomial() const { return d_->den.is_constant(); }
  Rational constant_value() const;  // requires is_constant
  std::optional<Symbol> as_symbol() const;
  // true when only symbols appear (no radicals or functions)
  bool is_rational_fragment() const;

  Expr operator-() const;
  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }
  Expr& operator/=(const Expr& o) { return *this = *this / o; }

  Expr pow(long n) const;

  int compare(const Expr& o) const;
  friend bool operator==(const Expr& a, const Expr& b) { return a.compare(b) == 0; }
  friend bool operator!=(const Expr& a, const Expr& b) { return a.compare(b) != 0; }
  friend bool operator<(const Expr& a, const Expr& b) { return a.compare(b) < 0; }

  AtomSet atoms() const;
  std::set<Symbol> free_symbols() const;
  bool depends_on(const Symbol& s) const;
  bool depends_on_kind(SymbolKind k) const;

  std::string str() const;  // grammar text, re-parseable for the public grammar

 private:
  struct Data {
    Poly num;
    Poly den;
  };
  explicit Expr(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
  static Expr raw(Poly num, Poly den);
  std::shared_ptr<const Data> d_;
};

Expr pow(const Expr& base, const Rational& exponent);
Expr sqrt(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr tanh(const Expr& e);
Expr sech(const Expr& e);
Expr atan(const Expr& e);
Expr apply_function(Func f, const Expr& e);

inline Expr sym(const Symbol& s) { return Expr(s); }
inline Expr sym(SymbolKind k, const std::string& name, MultiIndex d = {}) {
  return Expr(Symbol(k, name, d));
}

// Derivation that maps each symbol through `on_symbol` and extends to radicals
// and functions by the chain rule.
using SymbolDerivative = std::function<Expr(const Symbol&)>;
Expr derivation(const Expr& e, const SymbolDerivative& on_symbol);

Expr diff(const Expr& e, const Symbol& s);
Expr canonical(const Expr& e);

using Bindings = std::map<Symbol, Expr>;
Expr subst(const Expr& e, const Bindings& b);

// Coefficients of e as a polynomial in the given symbol; throws if e is not
// polynomial in it (the symbol may not occur in the denominator or inside
// radicals/functions).
std::map<int, Expr> coefficients(const Expr& e, const Symbol& s);
int degree(const Expr& e, const Symbol& s);

// Total order of a symbol for the multi-index, -1 when e has no symbol of the base.
int max_order(const Expr& e, SymbolKind k, const std::string& name);

}  // namespace mframe::symexpr
