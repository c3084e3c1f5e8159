#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mframe/numlab.hpp"
#include "mframe/varcalc.hpp"

namespace mframe::report {

using symexpr::Expr;

using json = nlohmann::ordered_json;

inline constexpr int kSchema = 1;

enum class Format { Json, Latex, Text };

// Symbolic derivation: invariant Euler-Lagrange system, syzygies and boundary coefficients.
struct Derivation {
  const liegroup::GroupActionSpec* spec = nullptr;
  std::string source;
  varcalc::InvariantLagrangian lagrangian;
  varcalc::ELSystem el;          // as derived, possibly with the multiplier
  varcalc::ELSystem eliminated;  // multiplier removed
  std::vector<bool> oracle;      // jet-coordinate Euler operator agrees, per dependent
  varcalc::BoundaryCoefficients boundary;
  bool multiplier_cancelled = false;  // generator_euler then taken from L without the multiplier term
};

// Throws varcalc::VerificationFailure when the jet-coordinate oracle disagrees.
Derivation derive(const varcalc::Context& ctx, const std::string& lagrangian);

struct Laws {
  const liegroup::GroupActionSpec* spec = nullptr;
  std::string source;
  varcalc::ConservationLawSet laws;
  std::optional<varcalc::Equation> killing;
  std::vector<varcalc::Equation> reduced;
  std::string note;  // why the Killing integral or reduced system is absent
  // parametrisation constraint sqrt(P) = 1 imposed on Ad(rho)^{-1} and the first integrals
  std::string constraint_form;
  liegroup::Matrix ad_inverse_on_constraint;
  std::vector<Expr> first_integrals_on_constraint;
};

Laws laws(const varcalc::Context& ctx, const std::string& lagrangian);

struct VerifyOptions {
  std::optional<double> step;
  std::optional<double> span;
  std::map<std::string, double> init;  // overrides of the demo initial data
  std::uint64_t seed = 0xfd;
};

struct Verification {
  std::string entry;
  std::string source;
  std::vector<std::string> notes;
  numlab::VerificationReport report;
  std::optional<numlab::Trajectory> trajectory;   // conservation run, curve included
  std::optional<varcalc::ConservationLawSet> laws;
  bool pass() const { return report.pass(); }
};

// Symbolic checks, conservation along an RK4 extremal, Killing integral, closed-form reconstruction
// and finite-difference audits. An empty lagrangian selects the entry's demo.
Verification verify(const varcalc::Context& ctx, const std::string& lagrangian, const VerifyOptions& opt);

json catalog_json(const std::string& dir = {});
std::string catalog_text(const std::string& dir = {});
std::string catalog_latex(const std::string& dir = {});

json to_json(const Derivation& d);
std::string to_text(const Derivation& d);
std::string to_latex(const Derivation& d);

json to_json(const Laws& l);
std::string to_text(const Laws& l);
std::string to_latex(const Laws& l);

json to_json(const Verification& v);
std::string to_text(const Verification& v);
std::string to_latex(const Verification& v);

// Plot data: s, state columns and the law components.
void write_plot_csv(std::ostream& os, const Verification& v);

template <class T>
std::string render(const T& x, Format f) {
  switch (f) {
    case Format::Json:
      return to_json(x).dump(2) + "\n";
    case Format::Latex:
      return to_latex(x);
    case Format::Text:
      return to_text(x);
  }
  return {};
}

}  // namespace mframe::report
