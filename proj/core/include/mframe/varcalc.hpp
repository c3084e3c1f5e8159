#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mframe/frame.hpp"

namespace mframe::varcalc {

using frame::InvariantTable;
using jetcalc::JetSpace;
using jetcalc::LinDiffOp;
using liegroup::GroupActionSpec;
using liegroup::Matrix;
using symexpr::Expr;
using symexpr::MultiIndex;
using symexpr::Symbol;
using symexpr::SymbolKind;
using symexpr::Var;

class LagrangianError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonlinearMultiplier : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularKillingForm : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroConstants : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxLagrangianOrder = 4;

// Frame, tau-extended invariant table and syzygies of a catalog entry.
struct Context {
  const GroupActionSpec* spec = nullptr;
  frame::MovingFrame frame;
  std::shared_ptr<const InvariantTable> table;
  frame::SyzygyOperators syzygies;

  const JetSpace& space() const { return syzygies.space; }
};

Context make_context(const GroupActionSpec& spec, int table_order = -1);
const Context& context(const GroupActionSpec& spec);  // cached per entry

struct InvariantLagrangian {
  Expr L;                              // in generator symbols
  bool constrained = true;             // append the entry's constraint when present
  std::optional<Symbol> multiplier;    // set when the constraint is appended
  Expr constraint;                     // constraint expression (zero when absent)
  int sign = 1;                        // full = L + sign * multiplier * constraint

  Expr full() const;
};

// Validates L against the entry's generators (order cap kMaxLagrangianOrder).
InvariantLagrangian make_lagrangian(const Context& ctx, const Expr& L, bool constrained = true);
InvariantLagrangian parse_lagrangian(const Context& ctx, const std::string& text, bool constrained = true);

// Seeded polynomial Lagrangian in the generators and their derivatives up to `order`.
Expr random_lagrangian(const Context& ctx, std::uint64_t seed, int order = 2, int terms = 4);

LinDiffOp adjoint_op(const LinDiffOp& op, const JetSpace& space);

struct ELSystem {
  std::vector<std::string> dependents;
  std::vector<Expr> equations;           // E^alpha(L) = 0
  std::vector<std::string> generators;
  std::vector<Expr> generator_euler;     // E^{kappa_j}(L) of the full Lagrangian
  std::optional<Symbol> multiplier;
  std::optional<Expr> multiplier_value;  // after elimination
  symexpr::Bindings eliminated;          // constraint and multiplier substitutions
};

ELSystem invariant_el(const Context& ctx, const InvariantLagrangian& L);

// Removes the multiplier using the parametrisation constraint; no-op without one.
ELSystem eliminate_multiplier(const Context& ctx, const ELSystem& el, const InvariantLagrangian& L);

struct BoundaryCoefficients {
  std::vector<Var> independent;
  std::vector<std::string> dependents;
  std::vector<Expr> bulk;                // E^alpha multiplying I^alpha_tau
  std::vector<Expr> variation_form;      // P_i in the D_J I^a_tau basis
  std::vector<Expr> tau_form;            // P_i in the I^a_{tau J} symbols
  // C[i][alpha]: J -> C^alpha_{i,J}
  std::vector<std::vector<std::map<MultiIndex, Expr>>> C;
  // multiplier terms removed after checking they are divergence free modulo the relations
  bool multiplier_dropped = false;
};

BoundaryCoefficients boundary_coeffs(const Context& ctx, const InvariantLagrangian& L);

struct ConservationLawSet {
  const GroupActionSpec* spec = nullptr;
  std::vector<Var> independent;
  Matrix ad_inverse;                      // Ad(rho)^{-1} in jets
  std::vector<std::vector<Expr>> upsilon; // [i][k] in generator symbols
  std::vector<Symbol> constants;          // c1..cr
  liegroup::RationalMatrix killing;
  bool semisimple = false;
  symexpr::Bindings eliminated;           // substitutions applied to upsilon
  std::vector<bool> trivial;              // law k vanishes identically

  // One independent variable: (Ad(rho)^{-1} upsilon)_k - c_k.
  std::vector<Expr> first_integrals() const;
  // Sum_i D_i (Ad(rho)^{-1} upsilon_i) in mixed jet/generator form.
  Expr component(std::size_t i, std::size_t k) const;
};

ConservationLawSet noether_laws(const Context& ctx, const InvariantLagrangian& L);

struct Equation {
  Expr lhs;
  Expr rhs;
  std::optional<Symbol> coordinate;  // Omega(z) column of a reduced-system row
  Expr residual() const { return lhs - rhs; }
};

// upsilon^T B^{-1} upsilon = c^T B^{-1} c
Equation killing_first_integral(const ConservationLawSet& laws);

// Omega(z)^T Ad(rho)^T B^{-1} upsilon(I) = Omega(z)^T B^{-1} c over the normalized coordinates z,
// identically trivial rows dropped.
std::vector<Equation> reduced_system(const Context& ctx, const ConservationLawSet& laws);

// sum_a E^a_inv dI^a_tau/du^b_tau - E^b(L in jets) for each dependent b, in jets.
std::vector<Expr> el_oracle_residuals(const Context& ctx, const InvariantLagrangian& L, const ELSystem& el);

// Antiderivative with respect to the single independent variable; nullopt when not exact.
std::optional<Expr> antiderivative(const Expr& e, const JetSpace& js);

// True when a and b differ by a nonzero constant factor (or are both zero).
bool equal_up_to_constant(const Expr& a, const Expr& b, Expr* factor = nullptr);

}  // namespace mframe::varcalc
