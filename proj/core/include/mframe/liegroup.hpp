#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mframe/jetcalc.hpp"

namespace mframe::liegroup {

using jetcalc::JetSpace;
using jetcalc::VectorField;
using symexpr::Expr;
using symexpr::MultiIndex;
using symexpr::Rational;
using symexpr::Symbol;
using symexpr::SymbolKind;
using symexpr::Var;

using Matrix = std::vector<std::vector<Expr>>;
using RationalMatrix = std::vector<std::vector<Rational>>;

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Normalization {
  Symbol coordinate;
  Rational value;
};

struct Generator {
  std::string name;        // sigma
  std::string latex;       // \sigma
  Symbol coordinate;       // u_xxx: the generator is I^u_K for this jet
};

struct ConstraintSpec {
  std::string multiplier = "lambda";
  Expr expr;               // in generator symbols
  int sign = 1;            // Lagrangian gains sign * lambda * expr
  std::string kind;        // "parametrization" or "syzygy"
};

struct GroupActionSpec {
  std::string name;
  std::string description;
  std::vector<Var> independent;
  std::vector<std::string> dependent;
  std::vector<std::string> parameters;          // local coordinates in basis order
  std::vector<std::string> angle_parameters;
  std::map<std::string, Expr> derived;            // dependent parameters, e.g. d
  std::map<std::string, Rational> identity;
  std::map<Symbol, Expr> action;                  // base coordinate -> g.z (local params only)
  std::map<std::string, Expr> product;            // (g h) in g-params and h-params (prefix h)
  std::map<std::string, Expr> inverse;
  std::vector<VectorField> infinitesimals;
  std::vector<Normalization> normalizations;
  std::map<std::string, Expr> frame;              // local params -> expression in jets
  std::vector<Expr> positive;                     // domain assumptions: each expression > 0
  std::vector<Generator> generators;
  std::vector<Symbol> relations;                  // generator derivatives eliminated by syzygy
  std::optional<ConstraintSpec> constraint;
  bool semisimple = true;
  symexpr::SymbolRegistry registry;

  std::size_t dim() const { return parameters.size(); }
  Symbol param(const std::string& n) const { return Symbol(SymbolKind::Parameter, n); }
  Symbol param2(const std::string& n) const { return Symbol(SymbolKind::Parameter, "h" + n); }
  Symbol dependent_symbol(std::size_t a, const MultiIndex& k = {}) const {
    return Symbol(SymbolKind::Jet, dependent.at(a), k);
  }
  JetSpace jet_space(int order = 8) const;
  JetSpace generator_space(int order = 12) const;  // generators (+ multiplier) as dependents

  // g-parameter substitution for a concrete parametrisation of g.
  symexpr::Bindings bind_params(const std::map<std::string, Expr>& values) const;
  Expr parse(const std::string& text) const;
};

// Validates the group law, left action and infinitesimals; throws CatalogError.
void validate(const GroupActionSpec& spec);

GroupActionSpec load_spec(const std::string& path);
std::vector<std::string> catalog_names(const std::string& dir = {});
const GroupActionSpec& catalog(const std::string& name, const std::string& dir = {});
std::string default_catalog_dir();

std::map<Symbol, Expr> prolonged_action(const GroupActionSpec& spec, int order);

// rows: parameters in spec order, columns: coords
Matrix infinitesimal_matrix(const GroupActionSpec& spec, const std::vector<Symbol>& coords);

Matrix adjoint_matrix(const GroupActionSpec& spec);
Matrix adjoint_at(const GroupActionSpec& spec, const Matrix& ad, const std::map<std::string, Expr>& g);

VectorField bracket(const VectorField& v, const VectorField& w);
// C[i][j][k]: [v_i, v_j] = sum_k C^k_ij v_k
std::vector<std::vector<std::vector<Rational>>> structure_constants(const GroupActionSpec& spec);
// rows are the images [v, v_j] in the basis, for v = sum coeffs_i v_i
Matrix ad_matrix(const GroupActionSpec& spec, const std::vector<Expr>& coeffs);
RationalMatrix killing_form(const GroupActionSpec& spec);

Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix inverse(const Matrix& a);  // throws RankDeficient
Matrix to_matrix(const RationalMatrix& m);
std::optional<RationalMatrix> inverse(const RationalMatrix& a);
Matrix map(const Matrix& m, const std::function<Expr(const Expr&)>& f);

}  // namespace mframe::liegroup
