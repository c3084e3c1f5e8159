#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mframe::symexpr {

// Independent variables known to the kernel. Tau is internal only and never
// appears in parsed input.
enum class Var : std::uint8_t { x = 0, t = 1, s = 2, tau = 3 };
inline constexpr int kNumVars = 4;

char var_char(Var v);
std::string var_name(Var v);
std::optional<Var> var_from_char(char c);

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(Var v, int n = 1) { c_[static_cast<int>(v)] = static_cast<std::uint8_t>(n); }

  static MultiIndex from_suffix(std::string_view suffix);

  int operator[](Var v) const { return c_[static_cast<int>(v)]; }
  int count(Var v) const { return c_[static_cast<int>(v)]; }
  int order() const;
  bool empty() const { return order() == 0; }

  MultiIndex plus(Var v, int n = 1) const;
  std::optional<MultiIndex> minus(Var v, int n = 1) const;
  MultiIndex operator+(const MultiIndex& o) const;
  std::optional<MultiIndex> operator-(const MultiIndex& o) const;
  bool divides(const MultiIndex& o) const;  // this <= o componentwise

  // Letters in canonical order, e.g. "xxt"; tau renders as 'T'.
  std::string suffix() const;
  std::vector<Var> sequence() const;

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::array<std::uint8_t, kNumVars> c_{};
};

enum class SymbolKind : std::uint8_t {
  Independent = 0,
  Jet = 1,
  Generator = 2,
  Parameter = 3,
  Constant = 4,
  Multiplier = 5,
  Invariant = 6,      // I^a_K, normalized differential invariants
  TauInvariant = 7,   // I^a_{tau K}
  Variation = 8,      // D_K I^a_tau in formal operator basis
};

std::string kind_name(SymbolKind k);

struct Symbol {
  SymbolKind kind = SymbolKind::Jet;
  std::string name;
  MultiIndex deriv;

  Symbol() = default;
  Symbol(SymbolKind k, std::string n, MultiIndex d = {}) : kind(k), name(std::move(n)), deriv(d) {}

  Symbol with_deriv(const MultiIndex& d) const { return Symbol(kind, name, d); }
  Symbol base() const { return Symbol(kind, name); }
  bool differentiable() const;

  std::string text() const;
  std::string latex() const;

  auto operator<=>(const Symbol&) const = default;
  bool operator==(const Symbol&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t pos, const std::string& msg);
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

class UnknownSymbol : public std::runtime_error {
 public:
  explicit UnknownSymbol(const std::string& name);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// Maps identifiers in expression text to symbols. A base registered as
// differentiable accepts derivative suffixes, e.g. u_xx or sigma_t.
class SymbolRegistry {
 public:
  void add(SymbolKind kind, const std::string& name, bool differentiable = false,
           std::string latex = {});
  bool contains(const std::string& name) const;
  Symbol resolve(std::string_view identifier) const;  // throws UnknownSymbol
  const std::string* latex_of(const std::string& name) const;
  void merge(const SymbolRegistry& other);
  std::vector<std::string> names() const;

 private:
  struct Entry {
    SymbolKind kind;
    bool differentiable;
    std::string latex;
  };
  std::map<std::string, Entry, std::less<>> entries_;
};

std::string latex_name(const std::string& name);

}  // namespace mframe::symexpr
