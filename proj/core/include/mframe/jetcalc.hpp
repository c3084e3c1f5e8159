#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mframe/expr.hpp"

namespace mframe::jetcalc {

using symexpr::Expr;
using symexpr::MultiIndex;
using symexpr::Symbol;
using symexpr::SymbolKind;
using symexpr::Var;

class TruncationExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateJacobian : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DependentVar {
  SymbolKind kind = SymbolKind::Jet;
  std::string name;
  bool operator==(const DependentVar&) const = default;
};

// Coordinates x_i and u^a_K with |K| <= order. Any symbol whose base matches a
// dependent variable is differentiated by the total derivative; independent
// variables are Independent symbols named by var_name().
struct JetSpace {
  std::vector<Var> independent;
  std::vector<DependentVar> dependent;
  int order = 8;

  JetSpace() = default;
  JetSpace(std::vector<Var> ind, std::vector<DependentVar> dep, int n = 8)
      : independent(std::move(ind)), dependent(std::move(dep)), order(n) {}

  bool is_dependent(const Symbol& s) const;
  Symbol independent_symbol(Var v) const;
  Symbol coordinate(std::size_t alpha, const MultiIndex& k) const;
  // all multi-indices over the active variables with |K| <= n, by order then lexicographically
  std::vector<MultiIndex> multi_indices(int n) const;
  std::vector<MultiIndex> multi_indices_of_order(int n) const;
};

Symbol independent_symbol(Var v);

Expr total_derivative(const Expr& e, Var i, const JetSpace& js);
Expr total_derivative(const Expr& e, const MultiIndex& k, const JetSpace& js);

// Base-coordinate vector field: coefficient per base coordinate symbol
// (independent variables and underived dependent variables).
struct VectorField {
  std::map<Symbol, Expr> coeff;

  Expr at(const Symbol& s) const;
  bool operator==(const VectorField& o) const;
};

VectorField prolong_vector_field(const VectorField& v, int order, const JetSpace& js);
// v applied to f as a derivation on its (prolonged) coordinates
Expr apply_vector_field(const VectorField& v, const Expr& f);

// Group action on base coordinates: transformed value per base coordinate in
// terms of coordinates and group parameters. Returns g.u^a_K for |K| <= order
// (plus the independent variables).
std::map<Symbol, Expr> prolong_action(const std::map<Symbol, Expr>& base_action, int order,
                                      const JetSpace& js);

Expr euler_operator(const Expr& L, const DependentVar& dep, const JetSpace& js);

// Multi-binomial coefficient prod_i C(j_i, k_i).
long multi_binomial(const MultiIndex& j, const MultiIndex& k);

// Linear differential operator sum_J a_J D_J.
class LinDiffOp {
 public:
  LinDiffOp() = default;
  static LinDiffOp identity();
  static LinDiffOp scalar(const Expr& a);
  static LinDiffOp derivative(const MultiIndex& j, const Expr& a = Expr(1));

  const std::map<MultiIndex, Expr>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  Expr coefficient(const MultiIndex& j) const;
  int order() const;

  Expr apply(const Expr& f, const JetSpace& js) const;
  LinDiffOp adjoint(const JetSpace& js) const;
  LinDiffOp compose(const LinDiffOp& inner, const JetSpace& js) const;  // this o inner
  LinDiffOp map_coefficients(const std::function<Expr(const Expr&)>& f) const;

  LinDiffOp operator+(const LinDiffOp& o) const;
  LinDiffOp operator-(const LinDiffOp& o) const;
  LinDiffOp operator-() const;
  LinDiffOp operator*(const Expr& a) const;  // coefficients scaled on the left
  bool operator==(const LinDiffOp& o) const;

  void add(const MultiIndex& j, const Expr& a);

  std::string str() const;
  std::string latex(const symexpr::SymbolRegistry* reg = nullptr) const;

 private:
  std::map<MultiIndex, Expr> t_;
};

}  // namespace mframe::jetcalc
