#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mframe/numeric.hpp"
#include "mframe/varcalc.hpp"

namespace mframe::numlab {

using symexpr::Bindings;
using symexpr::CompiledExpr;
using symexpr::Expr;
using symexpr::Symbol;
using symexpr::Var;

class NonExplicitSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BlowUp : public std::runtime_error {
 public:
  BlowUp(double s, const std::string& msg) : std::runtime_error(msg), s_(s) {}
  double location() const { return s_; }

 private:
  double s_;
};

class MissingVariable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateReconstruction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SamplingExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kBlowUp = 1e12;
inline constexpr double kSingular = 1e-8;

// First-order form: d state_i / ds = rates_i; derived symbols are expressions in the state.
struct ExplicitSystem {
  Var independent = Var::s;
  std::vector<Symbol> state;
  std::vector<Expr> rates;
  Bindings derived;
  std::map<Symbol, double> curve_start;  // curve state at the identity frame
};

// Solves each equation for the highest derivative of its generators; fixed symbols are substituted.
ExplicitSystem explicit_system(const std::vector<Expr>& equations, const Bindings& fixed = {});
ExplicitSystem explicit_system(const varcalc::ELSystem& el);

// Appends the curve (x, u, ...) to the state by solving the generator definitions for the top jets,
// starting at the identity frame. Parametrised Euclidean curves use a tangent angle psi with
// x_s = cos psi, u_s = sin psi; a Schwarzian generator uses u = y1/y2 with y'' + sigma y / 2 = 0.
ExplicitSystem with_curve(const ExplicitSystem& sys, const varcalc::Context& ctx);

struct Trajectory {
  std::string entry;
  std::string lagrangian;
  double h = 0.0;
  std::vector<double> s;
  std::vector<Symbol> columns;
  std::vector<std::vector<double>> values;  // [node][column]
  Bindings derived;
  std::map<std::string, double> constants;
  std::vector<std::string> notes;

  std::size_t size() const { return s.size(); }
  int column(const Symbol& c) const;  // -1 when absent
  // e with derived symbols expanded, compiled against columns; throws MissingVariable.
  CompiledExpr compile(const Expr& e, const std::vector<Symbol>& extra = {}) const;
  std::vector<double> evaluate(const Expr& e) const;
  void set_column(const Symbol& c, std::vector<double> v);
};

Trajectory integrate_el(const ExplicitSystem& sys, const std::map<Symbol, double>& init, double span, double h);

struct Check {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  int samples = 0;
  bool informational = false;  // reported, excluded from the verdict
  std::string note;
};

struct VerificationReport {
  std::vector<Check> checks;

  void add(std::string name, double residual, double tolerance, int samples, std::string note = {});
  void add_info(std::string name, double residual, double tolerance, int samples, std::string note = {});
  void append(const VerificationReport& o);
  bool pass() const;
};

// Law values at the first node.
std::vector<double> law_constants(const varcalc::ConservationLawSet& laws, const Trajectory& traj);

// Max deviation of each component of Ad(rho)^{-1} upsilon from its initial value.
VerificationReport check_constancy(const varcalc::ConservationLawSet& laws, const Trajectory& traj,
                                   double tolerance = 1e-6);

// Killing integral along the trajectory against c^T B^{-1} c from the laws at the first node.
VerificationReport check_killing(const varcalc::ConservationLawSet& laws, const Trajectory& traj,
                                 double tolerance = 1e-6);

// Residuals of equations in jets, generators and the constants c1..cr.
double max_residual(const Trajectory& traj, const Expr& e, const std::vector<double>& c);

// Closed-form reconstruction of (x, u); c are the law constants.
struct Reconstruction {
  Trajectory traj;
  VerificationReport report;
};

Reconstruction reconstruct_curve(const std::string& entry, const Trajectory& traj, const std::vector<double>& c);

// Trapezoid rule with running sum.
std::vector<double> cumulative_trapezoid(const std::vector<double>& s, const std::vector<double>& f);

// Central differences of e in var at random points against claimed.
VerificationReport fd_audit(const Expr& e, const Expr& claimed, const std::vector<Symbol>& vars,
                            std::uint64_t seed = 0xfd, int points = 20, double tolerance = 1e-5);

// Claimed total derivative of e along random polynomial curves.
VerificationReport fd_audit_total(const Expr& e, const Expr& claimed, const jetcalc::JetSpace& js,
                                  std::uint64_t seed = 0xfd, int points = 20, double tolerance = 1e-5);

// Observed order log2(e(h)/e(h/2)) of the endpoint error against a fine reference; NaN when e(h) is at
// rounding level.
double convergence_order(const ExplicitSystem& sys, const std::map<Symbol, double>& init, double span,
                         double h);

struct Demo {
  std::string entry;
  std::string lagrangian;
  std::map<std::string, double> init;  // symbol text -> value
  double span = 10.0;
  double h = 1e-3;
  std::string note;
};

Demo conservation_demo(const std::string& entry);
Demo reconstruction_demo(const std::string& entry);
std::map<Symbol, double> resolve_init(const ExplicitSystem& sys, const std::map<std::string, double>& init);

void write_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::pair<std::string, Expr>>& extra = {});
nlohmann::ordered_json to_json(const Trajectory& traj, std::size_t stride = 1);
nlohmann::ordered_json to_json(const VerificationReport& r);

}  // namespace mframe::numlab
