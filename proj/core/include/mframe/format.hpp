#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "mframe/expr.hpp"

namespace mframe::symexpr {

// Presentation tree of a canonical expression.
struct Node {
  enum class Kind { Rational, Symbol, Sum, Product, Power, Function };
  Kind kind = Kind::Rational;
  Rational value;     // Rational
  Symbol symbol;      // Symbol
  Rational exponent;  // Power
  std::string function;
  std::vector<Node> children;
};

Node tree(const Expr& e);

std::string to_text(const Expr& e);
std::string to_latex(const Expr& e, const SymbolRegistry* reg = nullptr);
nlohmann::json to_json(const Expr& e);
std::string rational_text(const Rational& q);

}  // namespace mframe::symexpr
