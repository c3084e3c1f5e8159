#include "mframe/format.hpp"

namespace mframe::symexpr {

std::string rational_text(const Rational& q) { return q.get_str(); }

namespace {

std::string text_of(const Expr& e);
std::string text_of_poly(const Poly& p);

std::string atom_text(const Atom& a) {
  switch (a->kind) {
    case AtomKind::Symbol: return a->sym.text();
    case AtomKind::Radical: return "sqrt(" + text_of_poly(*a->radicand) + ")";
    case AtomKind::Function: return func_name(a->fn) + "(" + text_of(*a->arg) + ")";
  }
  return "?";
}

std::string mono_text(const Monomial& m) {
  std::string s;
  for (const auto& [a, e] : m.factors()) {
    if (!s.empty()) s += "*";
    s += atom_text(a);
    if (e != 1) s += "^" + std::to_string(e);
  }
  return s;
}

std::string text_of_poly(const Poly& p) {
  if (p.is_zero()) return "0";
  std::string s;
  bool first = true;
  for (const auto& t : p.terms()) {
    Rational c = abs(t.coef);
    bool neg = t.coef < 0;
    if (first) {
      if (neg) s += "-";
    } else {
      s += neg ? " - " : " + ";
    }
    first = false;
    if (t.mono.is_one()) {
      s += rational_text(c);
    } else if (c == 1) {
      s += mono_text(t.mono);
    } else {
      s += rational_text(c) + "*" + mono_text(t.mono);
    }
  }
  return s;
}

bool bare_factor(const Poly& p) {
  return p.size() == 1 && p.leading().coef == 1 && p.leading().mono.factors().size() == 1;
}

std::string text_of(const Expr& e) {
  if (e.is_polynomial()) return text_of_poly(e.num());
  std::string n = text_of_poly(e.num());
  if (e.num().size() > 1) n = "(" + n + ")";
  std::string d = text_of_poly(e.den());
  if (!bare_factor(e.den())) d = "(" + d + ")";
  return n + "/" + d;
}

// ---------------------------------------------------------------- latex

struct Latex {
  const SymbolRegistry* reg;

  std::string symbol(const Symbol& s) const {
    if (reg && s.kind != SymbolKind::Invariant && s.kind != SymbolKind::TauInvariant &&
        s.kind != SymbolKind::Variation) {
      if (const std::string* l = reg->latex_of(s.name)) {
        Symbol t = s;
        std::string base = *l;
        std::string suf = s.deriv.suffix();
        return suf.empty() ? base : base + "_{" + suf + "}";
      }
    }
    return s.latex();
  }

  std::string rational(const Rational& q) const {
    if (q.get_den() == 1) return q.get_num().get_str();
    return "\\frac{" + q.get_num().get_str() + "}{" + q.get_den().get_str() + "}";
  }

  std::string atom(const Atom& a) const {
    switch (a->kind) {
      case AtomKind::Symbol: return symbol(a->sym);
      case AtomKind::Radical: return "\\sqrt{" + poly(*a->radicand) + "}";
      case AtomKind::Function: {
        std::string name;
        switch (a->fn) {
          case Func::Sin: name = "\\sin"; break;
          case Func::Cos: name = "\\cos"; break;
          case Func::Tanh: name = "\\tanh"; break;
          case Func::Sech: name = "\\operatorname{sech}"; break;
          case Func::Atan: name = "\\arctan"; break;
        }
        return name + "\\left(" + expr(*a->arg) + "\\right)";
      }
    }
    return "?";
  }

  std::string mono(const Monomial& m) const {
    std::string s;
    for (const auto& [a, e] : m.factors()) {
      if (!s.empty()) s += " ";
      std::string b = atom(a);
      if (e != 1) {
        if (a->kind == AtomKind::Function) b = "\\left(" + b + "\\right)";
        else if (a->kind == AtomKind::Symbol && !a->sym.deriv.empty()) b = "\\left(" + b + "\\right)";
        b += "^{" + std::to_string(e) + "}";
      }
      s += b;
    }
    return s;
  }

  std::string poly(const Poly& p) const {
    if (p.is_zero()) return "0";
    std::string s;
    bool first = true;
    for (const auto& t : p.terms()) {
      Rational c = abs(t.coef);
      bool neg = t.coef < 0;
      if (first) {
        if (neg) s += "-";
      } else {
        s += neg ? " - " : " + ";
      }
      first = false;
      if (t.mono.is_one()) s += rational(c);
      else if (c == 1) s += mono(t.mono);
      else s += rational(c) + " " + mono(t.mono);
    }
    return s;
  }

  std::string expr(const Expr& e) const {
    if (e.is_polynomial()) return poly(e.num());
    return "\\frac{" + poly(e.num()) + "}{" + poly(e.den()) + "}";
  }
};

// ---------------------------------------------------------------- tree

Node rational_node(const Rational& q) {
  Node n;
  n.kind = Node::Kind::Rational;
  n.value = q;
  return n;
}

Node poly_node(const Poly& p);

Node atom_node(const Atom& a) {
  Node n;
  switch (a->kind) {
    case AtomKind::Symbol:
      n.kind = Node::Kind::Symbol;
      n.symbol = a->sym;
      break;
    case AtomKind::Radical:
      n.kind = Node::Kind::Power;
      n.exponent = Rational(1, 2);
      n.children.push_back(poly_node(*a->radicand));
      break;
    case AtomKind::Function:
      n.kind = Node::Kind::Function;
      n.function = func_name(a->fn);
      n.children.push_back(tree(*a->arg));
      break;
  }
  return n;
}

Node term_node(const Term& t) {
  if (t.mono.is_one()) return rational_node(t.coef);
  std::vector<Node> fs;
  if (t.coef != 1) fs.push_back(rational_node(t.coef));
  for (const auto& [a, e] : t.mono.factors()) {
    if (e == 1) {
      fs.push_back(atom_node(a));
    } else {
      Node p;
      p.kind = Node::Kind::Power;
      p.exponent = Rational(e);
      p.children.push_back(atom_node(a));
      fs.push_back(std::move(p));
    }
  }
  if (fs.size() == 1) return fs[0];
  Node n;
  n.kind = Node::Kind::Product;
  n.children = std::move(fs);
  return n;
}

Node poly_node(const Poly& p) {
  if (p.is_zero()) return rational_node(Rational(0));
  if (p.size() == 1) return term_node(p.leading());
  Node n;
  n.kind = Node::Kind::Sum;
  for (const auto& t : p.terms()) n.children.push_back(term_node(t));
  return n;
}

nlohmann::json node_json(const Node& n) {
  nlohmann::json j;
  switch (n.kind) {
    case Node::Kind::Rational:
      j["kind"] = "rational";
      j["value"] = rational_text(n.value);
      return j;
    case Node::Kind::Symbol:
      j["kind"] = "symbol";
      j["name"] = n.symbol.text();
      j["base"] = n.symbol.name;
      j["symbol_kind"] = kind_name(n.symbol.kind);
      j["deriv"] = n.symbol.deriv.suffix();
      return j;
    case Node::Kind::Sum: j["kind"] = "sum"; break;
    case Node::Kind::Product: j["kind"] = "product"; break;
    case Node::Kind::Power:
      j["kind"] = "power";
      j["exponent"] = rational_text(n.exponent);
      break;
    case Node::Kind::Function:
      j["kind"] = "function";
      j["name"] = n.function;
      break;
  }
  j["children"] = nlohmann::json::array();
  for (const auto& c : n.children) j["children"].push_back(node_json(c));
  return j;
}

}  // namespace

Node tree(const Expr& e) {
  Node n = poly_node(e.num());
  if (e.is_polynomial()) return n;
  Node inv;
  inv.kind = Node::Kind::Power;
  inv.exponent = Rational(-1);
  inv.children.push_back(poly_node(e.den()));
  Node p;
  p.kind = Node::Kind::Product;
  if (n.kind == Node::Kind::Product) p.children = n.children;
  else p.children.push_back(n);
  p.children.push_back(std::move(inv));
  return p;
}

std::string to_text(const Expr& e) { return text_of(e); }

std::string to_latex(const Expr& e, const SymbolRegistry* reg) { return Latex{reg}.expr(e); }

nlohmann::json to_json(const Expr& e) { return node_json(tree(e)); }

}  // namespace mframe::symexpr
