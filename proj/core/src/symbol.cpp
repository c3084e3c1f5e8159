#include "mframe/symbol.hpp"

#include <cctype>

namespace mframe::symexpr {

char var_char(Var v) {
  switch (v) {
    case Var::x: return 'x';
    case Var::t: return 't';
    case Var::s: return 's';
    case Var::tau: return 'T';
  }
  return '?';
}

std::string var_name(Var v) { return v == Var::tau ? "tau" : std::string(1, var_char(v)); }

std::optional<Var> var_from_char(char c) {
  switch (c) {
    case 'x': return Var::x;
    case 't': return Var::t;
    case 's': return Var::s;
    default: return std::nullopt;
  }
}

MultiIndex MultiIndex::from_suffix(std::string_view suffix) {
  MultiIndex m;
  for (char ch : suffix) {
    auto v = var_from_char(ch);
    if (!v) throw std::invalid_argument("bad derivative suffix: " + std::string(suffix));
    m.c_[static_cast<int>(*v)]++;
  }
  return m;
}

int MultiIndex::order() const {
  int n = 0;
  for (auto c : c_) n += c;
  return n;
}

MultiIndex MultiIndex::plus(Var v, int n) const {
  MultiIndex m = *this;
  m.c_[static_cast<int>(v)] = static_cast<std::uint8_t>(m.c_[static_cast<int>(v)] + n);
  return m;
}

std::optional<MultiIndex> MultiIndex::minus(Var v, int n) const {
  if (count(v) < n) return std::nullopt;
  MultiIndex m = *this;
  m.c_[static_cast<int>(v)] = static_cast<std::uint8_t>(m.c_[static_cast<int>(v)] - n);
  return m;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  MultiIndex m;
  for (int i = 0; i < kNumVars; ++i) m.c_[i] = static_cast<std::uint8_t>(c_[i] + o.c_[i]);
  return m;
}

std::optional<MultiIndex> MultiIndex::operator-(const MultiIndex& o) const {
  MultiIndex m;
  for (int i = 0; i < kNumVars; ++i) {
    if (c_[i] < o.c_[i]) return std::nullopt;
    m.c_[i] = static_cast<std::uint8_t>(c_[i] - o.c_[i]);
  }
  return m;
}

bool MultiIndex::divides(const MultiIndex& o) const {
  for (int i = 0; i < kNumVars; ++i)
    if (c_[i] > o.c_[i]) return false;
  return true;
}

std::string MultiIndex::suffix() const {
  std::string s;
  for (auto v : sequence()) s += var_char(v);
  return s;
}

std::vector<Var> MultiIndex::sequence() const {
  std::vector<Var> out;
  // tau first: I^a_{tau K} reads naturally with tau leading.
  for (int k = 0; k < c_[3]; ++k) out.push_back(Var::tau);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < c_[i]; ++k) out.push_back(static_cast<Var>(i));
  return out;
}

std::string kind_name(SymbolKind k) {
  switch (k) {
    case SymbolKind::Independent: return "independent";
    case SymbolKind::Jet: return "jet";
    case SymbolKind::Generator: return "generator";
    case SymbolKind::Parameter: return "parameter";
    case SymbolKind::Constant: return "constant";
    case SymbolKind::Multiplier: return "multiplier";
    case SymbolKind::Invariant: return "invariant";
    case SymbolKind::TauInvariant: return "tau_invariant";
    case SymbolKind::Variation: return "variation";
  }
  return "unknown";
}

bool Symbol::differentiable() const {
  switch (kind) {
    case SymbolKind::Jet:
    case SymbolKind::Generator:
    case SymbolKind::Multiplier:
    case SymbolKind::Invariant:
    case SymbolKind::TauInvariant:
    case SymbolKind::Variation:
      return true;
    default:
      return false;
  }
}

std::string Symbol::text() const {
  std::string suf = deriv.suffix();
  switch (kind) {
    case SymbolKind::Invariant:
      return "I[" + name + "]" + (suf.empty() ? "" : "_" + suf);
    case SymbolKind::TauInvariant:
      return "I[" + name + "]_T" + suf;
    case SymbolKind::Variation:
      return "DI[" + name + "]" + (suf.empty() ? "" : "_" + suf);
    default:
      return suf.empty() ? name : name + "_" + suf;
  }
}

std::string latex_name(const std::string& name) {
  static const char* greek[] = {"alpha", "beta",  "gamma", "delta", "epsilon", "eta",
                                "theta", "kappa", "lambda", "mu",   "nu",      "xi",
                                "rho",   "sigma", "tau",   "phi",   "psi",     "omega",
                                "upsilon", "zeta", "chi"};
  for (const char* g : greek)
    if (name == g) return std::string("\\") + g;
  // trailing digits become a subscript: c1 -> c_{1}
  std::size_t k = name.size();
  while (k > 0 && std::isdigit(static_cast<unsigned char>(name[k - 1]))) --k;
  if (k > 0 && k < name.size()) return latex_name(name.substr(0, k)) + "_{" + name.substr(k) + "}";
  return name;
}

namespace {
std::string latex_suffix(const MultiIndex& d, bool with_tau_first) {
  std::string s;
  for (auto v : d.sequence()) {
    if (v == Var::tau) {
      if (with_tau_first) s += "\\tau ";
    } else {
      s += var_char(v);
    }
  }
  return s;
}
}  // namespace

std::string Symbol::latex() const {
  std::string base = latex_name(name);
  switch (kind) {
    case SymbolKind::Invariant:
      return deriv.empty() ? "I^{" + base + "}" : "I^{" + base + "}_{" + latex_suffix(deriv, true) + "}";
    case SymbolKind::TauInvariant: {
      std::string s = latex_suffix(deriv, true);
      return "I^{" + base + "}_{\\tau" + (s.empty() ? "" : " " + s) + "}";
    }
    case SymbolKind::Variation:
      if (deriv.empty()) return "I^{" + base + "}_{\\tau}";
      return "\\mathcal{D}_{" + latex_suffix(deriv, true) + "} I^{" + base + "}_{\\tau}";
    default:
      if (deriv.empty()) return base;
      return base + "_{" + latex_suffix(deriv, true) + "}";
  }
}

ParseError::ParseError(std::size_t pos, const std::string& msg)
    : std::runtime_error("parse error at position " + std::to_string(pos) + ": " + msg), pos_(pos) {}

UnknownSymbol::UnknownSymbol(const std::string& name)
    : std::runtime_error("unknown symbol: " + name), name_(name) {}

void SymbolRegistry::add(SymbolKind kind, const std::string& name, bool differentiable,
                         std::string latex) {
  if (auto it = entries_.find(name); it != entries_.end() && it->second.kind != kind)
    throw std::invalid_argument("symbol '" + name + "' already registered as " + kind_name(it->second.kind));
  entries_[name] = Entry{kind, differentiable, std::move(latex)};
}

bool SymbolRegistry::contains(const std::string& name) const { return entries_.count(name) > 0; }

Symbol SymbolRegistry::resolve(std::string_view identifier) const {
  if (auto it = entries_.find(identifier); it != entries_.end()) {
    return Symbol(it->second.kind, std::string(identifier));
  }
  auto us = identifier.rfind('_');
  if (us != std::string_view::npos && us + 1 < identifier.size()) {
    auto base = identifier.substr(0, us);
    auto suffix = identifier.substr(us + 1);
    auto it = entries_.find(base);
    bool ok = it != entries_.end() && it->second.differentiable;
    for (char c : suffix) ok = ok && var_from_char(c).has_value();
    if (ok) return Symbol(it->second.kind, std::string(base), MultiIndex::from_suffix(suffix));
  }
  throw UnknownSymbol(std::string(identifier));
}

const std::string* SymbolRegistry::latex_of(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end() || it->second.latex.empty()) return nullptr;
  return &it->second.latex;
}

void SymbolRegistry::merge(const SymbolRegistry& other) {
  for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

std::vector<std::string> SymbolRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

}  // namespace mframe::symexpr
