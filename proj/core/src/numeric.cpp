#include "mframe/numeric.hpp"

#include <cmath>
#include <random>

namespace mframe::symexpr {

struct CompiledExpr::Program {
  struct AtomCode {
    AtomKind kind;
    int slot = -1;   // Symbol
    int poly = -1;   // Radical radicand
    Func fn = Func::Sin;
    int num = -1, den = -1;  // Function argument polys
  };
  struct PolyCode {
    std::vector<double> coef;
    std::vector<std::vector<std::pair<int, int>>> mono;  // (atom index, exponent)
  };
  std::vector<AtomCode> atoms;  // dependencies come first
  std::vector<PolyCode> polys;
  int num = -1, den = -1;

  std::map<Atom, int, AtomLess> atom_index;
  const std::vector<Symbol>* slots = nullptr;

  int add_poly(const Poly& p) {
    PolyCode pc;
    for (const auto& t : p.terms()) {
      pc.coef.push_back(t.coef.get_d());
      std::vector<std::pair<int, int>> m;
      for (const auto& [a, e] : t.mono.factors()) m.emplace_back(add_atom(a), e);
      pc.mono.push_back(std::move(m));
    }
    polys.push_back(std::move(pc));
    return static_cast<int>(polys.size()) - 1;
  }

  int add_atom(const Atom& a) {
    if (auto it = atom_index.find(a); it != atom_index.end()) return it->second;
    AtomCode c;
    c.kind = a->kind;
    switch (a->kind) {
      case AtomKind::Symbol: {
        for (std::size_t i = 0; i < slots->size(); ++i)
          if ((*slots)[i] == a->sym) c.slot = static_cast<int>(i);
        if (c.slot < 0) throw EvalError("unbound symbol: " + a->sym.text());
        break;
      }
      case AtomKind::Radical:
        c.poly = add_poly(*a->radicand);
        break;
      case AtomKind::Function:
        c.fn = a->fn;
        c.num = add_poly(a->arg->num());
        c.den = add_poly(a->arg->den());
        break;
    }
    atoms.push_back(c);
    int idx = static_cast<int>(atoms.size()) - 1;
    atom_index.emplace(a, idx);
    return idx;
  }

  double eval_poly(int p, const std::vector<double>& av) const {
    const PolyCode& pc = polys[static_cast<std::size_t>(p)];
    double s = 0;
    for (std::size_t i = 0; i < pc.coef.size(); ++i) {
      double t = pc.coef[i];
      for (const auto& [a, e] : pc.mono[i]) {
        double v = av[static_cast<std::size_t>(a)];
        t *= e == 1 ? v : std::pow(v, e);
      }
      s += t;
    }
    return s;
  }

  // atoms are evaluated in creation order, which respects dependencies
  void eval_atoms(const double* values, std::vector<double>& av) const {
    av.resize(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const AtomCode& c = atoms[i];
      switch (c.kind) {
        case AtomKind::Symbol: av[i] = values[c.slot]; break;
        case AtomKind::Radical: {
          double r = eval_poly(c.poly, av);
          if (r < 0) {
            if (r > -1e-300) r = 0;
            else throw EvalError("negative radicand");
          }
          av[i] = std::sqrt(r);
          break;
        }
        case AtomKind::Function: {
          double d = eval_poly(c.den, av);
          if (d == 0) throw EvalError("division by zero");
          double x = eval_poly(c.num, av) / d;
          switch (c.fn) {
            case Func::Sin: av[i] = std::sin(x); break;
            case Func::Cos: av[i] = std::cos(x); break;
            case Func::Tanh: av[i] = std::tanh(x); break;
            case Func::Sech: av[i] = 1.0 / std::cosh(x); break;
            case Func::Atan: av[i] = std::atan(x); break;
          }
          break;
        }
      }
    }
  }
};

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<Symbol>& slots) {
  auto p = std::make_shared<Program>();
  p->slots = &slots;
  // symbols get registered lazily while polys are added
  p->num = p->add_poly(e.num());
  p->den = p->add_poly(e.den());
  p->slots = nullptr;
  p->atom_index.clear();
  prog_ = std::move(p);
}

double CompiledExpr::operator()(const double* values) const {
  if (!prog_) return 0.0;
  thread_local std::vector<double> av;
  prog_->eval_atoms(values, av);
  double d = prog_->eval_poly(prog_->den, av);
  if (d == 0) throw EvalError("division by zero");
  return prog_->eval_poly(prog_->num, av) / d;
}

double eval_num(const Expr& e, const Point& point) {
  std::vector<Symbol> slots;
  std::vector<double> vals;
  for (const auto& [s, v] : point) {
    slots.push_back(s);
    vals.push_back(v);
  }
  CompiledExpr c(e, slots);
  return c(vals);
}

namespace {

double eval_plain(const Expr& e, const std::map<Symbol, double>& pt);

double eval_atom(const Atom& a, const std::map<Symbol, double>& pt) {
  switch (a->kind) {
    case AtomKind::Symbol: return pt.at(a->sym);
    case AtomKind::Radical: {
      double s = 0;
      for (const auto& t : a->radicand->terms()) {
        double v = t.coef.get_d();
        for (const auto& [b, e] : t.mono.factors()) v *= std::pow(eval_atom(b, pt), e);
        s += v;
      }
      if (s < 0) throw EvalError("negative radicand");
      return std::sqrt(s);
    }
    case AtomKind::Function: {
      double x = eval_plain(*a->arg, pt);
      switch (a->fn) {
        case Func::Sin: return std::sin(x);
        case Func::Cos: return std::cos(x);
        case Func::Tanh: return std::tanh(x);
        case Func::Sech: return 1.0 / std::cosh(x);
        case Func::Atan: return std::atan(x);
      }
    }
  }
  return 0;
}

std::pair<double, double> eval_poly_scale(const Poly& p, const std::map<Symbol, double>& pt) {
  double s = 0, sc = 0;
  for (const auto& t : p.terms()) {
    double v = t.coef.get_d();
    for (const auto& [b, e] : t.mono.factors()) v *= std::pow(eval_atom(b, pt), e);
    s += v;
    sc += std::fabs(v);
  }
  return {s, sc};
}

double eval_plain(const Expr& e, const std::map<Symbol, double>& pt) {
  auto [d, ds] = eval_poly_scale(e.den(), pt);
  if (std::fabs(d) < 1e-12 * std::max(1.0, ds)) throw EvalError("division by zero");
  return eval_poly_scale(e.num(), pt).first / d;
}

}  // namespace

ZeroVerdict zero_test(const Expr& e, std::uint64_t seed, int samples) {
  ZeroVerdict v;
  if (e.is_zero()) {
    v.zero = true;
    return v;
  }
  if (e.is_rational_fragment()) return v;
  v.probabilistic = true;
  auto syms = e.free_symbols();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> num(3, 40), den(7, 23);
  int good = 0;
  for (int draw = 0; draw < 1000 && good < samples; ++draw) {
    std::map<Symbol, double> pt;
    for (const auto& s : syms) pt[s] = static_cast<double>(num(rng)) / den(rng);
    try {
      auto [d, ds] = eval_poly_scale(e.den(), pt);
      if (!std::isfinite(d) || std::fabs(d) < 1e-9 * std::max(1.0, ds)) continue;
      auto [n, ns] = eval_poly_scale(e.num(), pt);
      if (!std::isfinite(n)) continue;
      double rel = std::fabs(n) / std::max(ns, 1e-300);
      v.max_residual = std::max(v.max_residual, rel);
      ++good;
      if (rel > 1e-9) return v;
    } catch (const EvalError&) {
      continue;
    }
  }
  if (good < samples) throw EvalError("no valid sample point found in 1000 draws");
  v.samples = good;
  v.zero = true;
  return v;
}

bool is_zero(const Expr& e) { return zero_test(e).zero; }

}  // namespace mframe::symexpr
