#pragma once

#include <string_view>

#include "mframe/expr.hpp"
#include "mframe/symbol.hpp"

namespace mframe::symexpr {

// Grammar: identifiers [A-Za-z][A-Za-z0-9]*(_[xts]+)?, operators + - * / ^,
// integer literals, functions sqrt sin cos tanh sech atan. The exponent of ^
// is an integer or a parenthesized (optionally negative) rational.
Expr parse(std::string_view text, const SymbolRegistry& registry);

}  // namespace mframe::symexpr
