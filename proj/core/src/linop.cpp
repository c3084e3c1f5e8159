#include "mframe/format.hpp"
#include "mframe/jetcalc.hpp"

namespace mframe::jetcalc {

LinDiffOp LinDiffOp::identity() { return derivative(MultiIndex(), Expr(1)); }

LinDiffOp LinDiffOp::scalar(const Expr& a) { return derivative(MultiIndex(), a); }

LinDiffOp LinDiffOp::derivative(const MultiIndex& j, const Expr& a) {
  LinDiffOp op;
  op.add(j, a);
  return op;
}

void LinDiffOp::add(const MultiIndex& j, const Expr& a) {
  if (a.is_zero()) return;
  auto it = t_.find(j);
  if (it == t_.end()) {
    t_.emplace(j, a);
    return;
  }
  it->second += a;
  if (it->second.is_zero()) t_.erase(it);
}

Expr LinDiffOp::coefficient(const MultiIndex& j) const {
  auto it = t_.find(j);
  return it == t_.end() ? Expr() : it->second;
}

int LinDiffOp::order() const {
  int n = -1;
  for (const auto& [j, a] : t_) n = std::max(n, j.order());
  return n;
}

Expr LinDiffOp::apply(const Expr& f, const JetSpace& js) const {
  Expr r;
  for (const auto& [j, a] : t_) r += a * total_derivative(f, j, js);
  return r;
}

namespace {
std::vector<MultiIndex> sub_indices(const MultiIndex& j) {
  std::vector<MultiIndex> out{MultiIndex()};
  for (int v = 0; v < symexpr::kNumVars; ++v) {
    int n = j.count(static_cast<Var>(v));
    std::vector<MultiIndex> next;
    for (const auto& m : out)
      for (int k = 0; k <= n; ++k) next.push_back(k ? m.plus(static_cast<Var>(v), k) : m);
    out = std::move(next);
  }
  return out;
}
}  // namespace

LinDiffOp LinDiffOp::adjoint(const JetSpace& js) const {
  LinDiffOp r;
  for (const auto& [j, a] : t_) {
    Expr sign = (j.order() % 2) ? Expr(-1) : Expr(1);
    for (const auto& k : sub_indices(j)) {
      Expr d = total_derivative(a, *(j - k), js);
      r.add(k, sign * Expr(multi_binomial(j, k)) * d);
    }
  }
  return r;
}

LinDiffOp LinDiffOp::compose(const LinDiffOp& inner, const JetSpace& js) const {
  LinDiffOp r;
  for (const auto& [j, a] : t_)
    for (const auto& [k, b] : inner.t_)
      for (const auto& l : sub_indices(j)) {
        Expr d = total_derivative(b, *(j - l), js);
        r.add(l + k, a * Expr(multi_binomial(j, l)) * d);
      }
  return r;
}

LinDiffOp LinDiffOp::map_coefficients(const std::function<Expr(const Expr&)>& f) const {
  LinDiffOp r;
  for (const auto& [j, a] : t_) r.add(j, f(a));
  return r;
}

LinDiffOp LinDiffOp::operator+(const LinDiffOp& o) const {
  LinDiffOp r = *this;
  for (const auto& [j, a] : o.t_) r.add(j, a);
  return r;
}

LinDiffOp LinDiffOp::operator-() const {
  LinDiffOp r;
  for (const auto& [j, a] : t_) r.add(j, -a);
  return r;
}

LinDiffOp LinDiffOp::operator-(const LinDiffOp& o) const { return *this + (-o); }

LinDiffOp LinDiffOp::operator*(const Expr& c) const {
  LinDiffOp r;
  for (const auto& [j, a] : t_) r.add(j, c * a);
  return r;
}

bool LinDiffOp::operator==(const LinDiffOp& o) const {
  if (t_.size() != o.t_.size()) return false;
  for (const auto& [j, a] : t_)
    if (o.coefficient(j) != a) return false;
  return true;
}

namespace {
std::string d_text(const MultiIndex& j) {
  std::string s;
  for (int v = 0; v < symexpr::kNumVars; ++v) {
    int n = j.count(static_cast<Var>(v));
    if (!n) continue;
    if (!s.empty()) s += "*";
    s += "D_" + std::string(1, symexpr::var_char(static_cast<Var>(v)));
    if (n > 1) s += "^" + std::to_string(n);
  }
  return s;
}

std::string d_latex(const MultiIndex& j) {
  std::string s;
  for (int v = 0; v < symexpr::kNumVars; ++v) {
    int n = j.count(static_cast<Var>(v));
    if (!n) continue;
    if (!s.empty()) s += " ";
    auto var = static_cast<Var>(v);
    s += "D_{" + std::string(var == Var::tau ? "\\tau" : std::string(1, symexpr::var_char(var))) + "}";
    if (n > 1) s += "^{" + std::to_string(n) + "}";
  }
  return s;
}
}  // namespace

std::string LinDiffOp::str() const {
  if (t_.empty()) return "0";
  std::string s;
  for (auto it = t_.rbegin(); it != t_.rend(); ++it) {
    const auto& [j, a] = *it;
    std::string c = a.str();
    bool neg = !c.empty() && c[0] == '-' && a.num().size() == 1;
    if (neg) c = (-a).str();
    std::string term;
    if (j.empty()) {
      term = c;
    } else if (c == "1") {
      term = d_text(j);
    } else {
      bool compound = a.num().size() > 1 || !a.is_polynomial();
      term = (compound ? "(" + c + ")" : c) + "*" + d_text(j);
    }
    if (s.empty()) s = neg ? "-" + term : term;
    else s += (neg ? " - " : " + ") + term;
  }
  return s;
}

std::string LinDiffOp::latex(const symexpr::SymbolRegistry* reg) const {
  if (t_.empty()) return "0";
  std::string s;
  for (auto it = t_.rbegin(); it != t_.rend(); ++it) {
    const auto& [j, a] = *it;
    bool neg = a.num().size() == 1 && a.num().leading().coef < 0;
    Expr aa = neg ? -a : a;
    std::string c = symexpr::to_latex(aa, reg);
    std::string term;
    if (j.empty()) term = c;
    else if (aa == Expr(1)) term = d_latex(j);
    else if (aa.num().size() > 1) term = "\\left(" + c + "\\right) " + d_latex(j);
    else term = c + " " + d_latex(j);
    if (s.empty()) s = neg ? "-" + term : term;
    else s += (neg ? " - " : " + ") + term;
  }
  return s;
}

}  // namespace mframe::jetcalc
