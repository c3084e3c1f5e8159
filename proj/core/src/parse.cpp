#include "mframe/parse.hpp"

#include <cctype>
#include <string>

namespace mframe::symexpr {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const SymbolRegistry& reg) : s_(text), reg_(reg) {}

  Expr run() {
    Expr e = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_, msg); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr sum() {
    Expr e = product();
    for (;;) {
      if (accept('+')) e = e + product();
      else if (accept('-')) e = e - product();
      else return e;
    }
  }

  Expr product() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        std::size_t at = pos_;
        Expr d = unary();
        if (d.is_zero()) throw ParseError(at, "division by zero");
        e = e / d;
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Integer integer() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer");
    return Integer(std::string(s_.substr(start, pos_ - start)));
  }

  Rational exponent() {
    skip();
    if (accept('(')) {
      bool neg = accept('-');
      Integer p = integer();
      Integer q = 1;
      if (accept('/')) q = integer();
      expect(')');
      if (q == 0) fail("zero denominator in exponent");
      Rational r(neg ? Integer(-p) : p, q);
      r.canonicalize();
      return r;
    }
    bool neg = accept('-');
    Integer p = integer();
    return Rational(neg ? Integer(-p) : p);
  }

  Expr power() {
    Expr base = primary();
    skip();
    if (accept('^')) {
      std::size_t at = pos_;
      Rational k = exponent();
      try {
        return pow(base, k);
      } catch (const DivisionByZero&) {
        throw ParseError(at, "division by zero");
      } catch (const std::domain_error& e) {
        throw ParseError(at, e.what());
      }
    }
    return base;
  }

  Expr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return Expr(Rational(integer()));
    if (c == '(') {
      ++pos_;
      Expr e = sum();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    std::string_view base = s_.substr(start, pos_ - start);
    static const std::pair<const char*, Func> funcs[] = {{"sin", Func::Sin},   {"cos", Func::Cos},
                                                         {"tanh", Func::Tanh}, {"sech", Func::Sech},
                                                         {"atan", Func::Atan}};
    bool is_sqrt = base == "sqrt";
    const Func* fn = nullptr;
    for (const auto& [n, f] : funcs)
      if (base == n) fn = &f;
    if (is_sqrt || fn) {
      skip();
      if (pos_ >= s_.size() || s_[pos_] != '(') fail("function '" + std::string(base) + "' needs an argument");
      ++pos_;
      Expr arg = sum();
      expect(')');
      return is_sqrt ? sqrt(arg) : apply_function(*fn, arg);
    }
    if (pos_ < s_.size() && s_[pos_] == '_') {
      ++pos_;
      std::size_t sstart = pos_;
      while (pos_ < s_.size() && (s_[pos_] == 'x' || s_[pos_] == 't' || s_[pos_] == 's')) ++pos_;
      if (sstart == pos_) fail("expected derivative suffix of x, t, s");
      if (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_])))
        fail("bad derivative suffix");
    }
    std::string_view id = s_.substr(start, pos_ - start);
    return Expr(reg_.resolve(id));
  }

  std::string_view s_;
  const SymbolRegistry& reg_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const SymbolRegistry& registry) { return Parser(text, registry).run(); }

}  // namespace mframe::symexpr
