#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mframe/expr.hpp"

namespace mframe::symexpr {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Point = std::map<Symbol, double>;

double eval_num(const Expr& e, const Point& point);

// Expression compiled against a fixed list of symbol slots.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, const std::vector<Symbol>& slots);
  double operator()(const double* values) const;
  double operator()(const std::vector<double>& values) const { return (*this)(values.data()); }

  struct Program;

 private:
  std::shared_ptr<const Program> prog_;
};

struct ZeroVerdict {
  bool zero = false;
  bool probabilistic = false;  // verdict relied on numeric sampling
  int samples = 0;
  double max_residual = 0.0;
};

// Exact for the rational fragment; numeric confirmation at random positive
// rational points otherwise.
ZeroVerdict zero_test(const Expr& e, std::uint64_t seed = 0x5eed, int samples = 24);
bool is_zero(const Expr& e);

}  // namespace mframe::symexpr
