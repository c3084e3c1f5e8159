#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mframe/liegroup.hpp"
#include "mframe/numeric.hpp"

namespace mframe::frame {

using jetcalc::JetSpace;
using jetcalc::LinDiffOp;
using liegroup::GroupActionSpec;
using symexpr::Expr;
using symexpr::MultiIndex;
using symexpr::Symbol;
using symexpr::SymbolKind;
using symexpr::Var;

class FrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotInvariant : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonlinearTopOrder : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CollectionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MovingFrame {
  const GroupActionSpec* spec = nullptr;
  std::map<std::string, Expr> rho;  // parameter -> expression in jets
  std::vector<Expr> positive;       // domain: each expression > 0
  int order = 0;                    // highest jet order used by rho

  symexpr::Bindings bindings() const;
};

struct EquivarianceReport {
  int samples = 0;
  double frame_residual = 0.0;      // max |rho(g.z) - rho(z) g^-1|
  double invariant_residual = 0.0;  // max |I(g.z) - I(z)| over the generators
  double cross_section_residual = 0.0;
};

// Verifies the catalog frame: normalizations hold symbolically, numeric
// equivariance at `samples` random (g, z). Throws FrameError.
MovingFrame solve_frame(const GroupActionSpec& spec, int samples = 50, std::uint64_t seed = 0xf7a3e);

EquivarianceReport check_equivariance(const MovingFrame& f, int samples, std::uint64_t seed,
                                      int invariant_order = -1);

// Random jet point inside the frame domain for the given coordinates.
symexpr::Point sample_domain(const MovingFrame& f, const std::vector<Symbol>& coords, std::mt19937_64& rng);

// Lazily prolonged action evaluated at the frame. The jet space may include tau.
class Invariantizer {
 public:
  Invariantizer(const MovingFrame& f, JetSpace js);

  const JetSpace& jets() const { return js_; }
  const Expr& transformed(const Symbol& jet);  // g.u^a_K
  const Expr& invariant(const Symbol& jet);    // I^a_K in jet coordinates
  Expr operator()(const Expr& e);

 private:
  const GroupActionSpec* spec_;
  JetSpace js_;
  symexpr::Bindings rho_;
  std::map<Symbol, Expr> transformed_;
  std::map<Symbol, Expr> invariant_;
};

Expr invariantize(const Expr& e, const MovingFrame& f);

class InvariantTable {
 public:
  InvariantTable(const MovingFrame& f, int order, bool with_tau = false);

  int order() const { return order_; }
  bool with_tau() const { return with_tau_; }
  const MovingFrame& frame() const { return frame_; }
  const GroupActionSpec& spec() const { return *frame_.spec; }
  const JetSpace& jets() const { return jets_; }
  // generators (and the multiplier) as formal dependent variables
  const JetSpace& formal() const { return formal_; }
  // variation symbols D_J I^a_tau as formal dependent variables alongside the generators
  const JetSpace& variation_space() const { return variations_; }

  const std::vector<Symbol>& coordinates() const { return coords_; }
  bool contains(const Symbol& jet) const { return generator_.count(jet) > 0; }
  const Expr& explicit_form(const Symbol& jet) const;
  const Expr& generator_form(const Symbol& jet) const;

  // Replacement: jets -> generator forms, u^a_{tau J} -> I^a_{tau J}.
  Expr replace(const Expr& e) const;
  // generator derivative symbol -> explicit jet expression
  Expr definition(const Symbol& g) const;
  // generator symbols -> explicit jets
  Expr to_jets(const Expr& e) const;

  // Generator derivatives fixed by differential relations among generators.
  const std::map<Symbol, Expr>& relations() const { return relations_; }
  // Eliminates relation symbols and their derivatives.
  Expr reduce(const Expr& e) const;

  // D_J of the explicit I^a_tau, replaced: a linear form in I^b_{tau K}. Requires tau.
  Expr variation(std::size_t alpha, const MultiIndex& j) const;
  // The inverse: I^a_{tau J} as a linear form in variation symbols D_K I^b_tau.
  Expr tau_invariant(std::size_t alpha, const MultiIndex& j) const;
  // D_J of explicit I^a_tau in jet coordinates
  Expr variation_explicit(std::size_t alpha, const MultiIndex& j) const;

  // Explicit and generator forms agree on every entry; throws FrameError.
  void verify() const;

  Symbol tau_symbol(std::size_t alpha, const MultiIndex& j) const;
  Symbol variation_symbol(std::size_t alpha, const MultiIndex& j) const;

 private:
  void build();
  void extend_inverse(int n) const;

  MovingFrame frame_;
  int order_;
  bool with_tau_;
  JetSpace jets_, formal_, variations_;
  mutable Invariantizer inv_;
  std::vector<Symbol> coords_;
  std::map<Symbol, Expr> generator_;
  std::map<Symbol, Expr> relations_;
  mutable std::map<Symbol, Expr> definitions_;
  mutable std::map<std::pair<std::size_t, MultiIndex>, Expr> var_explicit_, var_form_, tau_form_;
  mutable int inverse_order_ = -1;
};

InvariantTable build_invariant_table(const MovingFrame& f, int order, bool with_tau = false);

// Replacement of an invariant expression. Throws NotInvariant.
Expr rewrite_in_invariants(const Expr& e, const InvariantTable& t);

struct SyzygyOperators {
  std::vector<std::string> generators;
  std::vector<std::string> dependents;
  std::vector<std::vector<LinDiffOp>> H;  // [generator][dependent]
  JetSpace space;                         // formal space the operators act on

  const LinDiffOp& at(std::size_t j, std::size_t alpha) const { return H.at(j).at(alpha); }
};

SyzygyOperators syzygy_operators(const InvariantTable& t);

// D_tau kappa_j - sum_a H_ja I^a_tau in explicit jets; throws FrameError if nonzero.
void verify_syzygies(const SyzygyOperators& h, const InvariantTable& t);

// Terms of e linear in symbols of the kind; throws CollectionFailure otherwise.
std::map<Symbol, Expr> linear_form(const Expr& e, SymbolKind kind);

// Ad(rho)^{-1} = Ad(rho^{-1}) in jet coordinates.
liegroup::Matrix adjoint_inverse_at_frame(const MovingFrame& f, const liegroup::Matrix& ad);

// Omega^a(I): rows per parameter, columns per multi-index (of order <= n) for dependent a.
liegroup::Matrix invariantized_infinitesimals(const InvariantTable& t, std::size_t alpha,
                                              const std::vector<MultiIndex>& columns);

}  // namespace mframe::frame
