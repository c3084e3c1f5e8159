#include <gtest/gtest.h>

#include <sstream>

#include "mframe/report.hpp"

using namespace mframe;
using report::json;

namespace {

const varcalc::Context& ctx(const std::string& n) { return varcalc::context(liegroup::catalog(n)); }

std::string text_of(const json& j) { return j["text"].get<std::string>(); }

bool has_note(const report::Verification& v, const std::string& prefix) {
  for (const auto& n : v.notes)
    if (n.rfind(prefix, 0) == 0) return true;
  return false;
}

}  // namespace

TEST(Derive, ProjectiveOperatorForm) {
  auto j = report::to_json(report::derive(ctx("sl2-action1"), "sigma_x^2/2"));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["command"], "derive");
  const auto& el = j["euler_lagrange"][0];
  EXPECT_EQ(text_of(el["value"]), "2*sigma*sigma_xxx + sigma_x*sigma_xx + sigma_xxxxx");
  EXPECT_EQ(text_of(el["operator_form"][0]["operator"]), "-D_x^3 - 2*sigma*D_x - sigma_x");
  EXPECT_EQ(el["operator_form"][0]["argument"], "sigma");
  EXPECT_TRUE(el["oracle_agrees"].get<bool>());
  EXPECT_EQ(text_of(j["generator_euler"][0]["value"]), "-sigma_xx");
  EXPECT_EQ(text_of(j["syzygies"][0]), "D_x^3 + 2*sigma*D_x + sigma_x");
}

TEST(Derive, SurfaceOutputHasNoMultiplier) {
  for (const std::string t : {"sigma_x^2/2 + kappa*sigma_t", "kappa^2*sigma + sigma_t*kappa_x"}) {
    auto d = report::derive(ctx("sl2-surface"), t);
    EXPECT_TRUE(d.multiplier_cancelled);
    const std::string out = report::render(d, report::Format::Json) + report::render(d, report::Format::Latex) +
                            report::render(d, report::Format::Text);
    EXPECT_EQ(out.find("lambda"), std::string::npos) << t;
  }
}

TEST(Derive, ElasticaMultiplier) {
  auto j = report::to_json(report::derive(ctx("se2-curve"), "kappa^2"));
  EXPECT_EQ(text_of(j["multiplier"]["value"]), "3*kappa^2");
  EXPECT_TRUE(j["euler_lagrange"][0]["value"]["text"] == "0");
  EXPECT_EQ(text_of(j["euler_lagrange"][1]["value"]), "kappa^3 + 2*kappa_ss");
}

TEST(Derive, LatexUsesGreekNames) {
  auto s = report::render(report::derive(ctx("sl2-action1"), "sigma_x^2/2"), report::Format::Latex);
  EXPECT_NE(s.find("\\sigma"), std::string::npos);
  EXPECT_NE(s.find("\\mathsf{E}"), std::string::npos);
}

TEST(Derive, RejectsBadLagrangian) {
  EXPECT_THROW(report::derive(ctx("sl2-action1"), "sigma_x^"), symexpr::ParseError);
  EXPECT_THROW(report::derive(ctx("sl2-action1"), "nosuch"), symexpr::UnknownSymbol);
  EXPECT_THROW(report::derive(ctx("sl2-action1"), "u_x"), varcalc::LagrangianError);
}

TEST(Laws, ElasticaOnArcLength) {
  auto l = report::laws(ctx("se2-curve"), "kappa^2");
  ASSERT_EQ(l.ad_inverse_on_constraint.size(), 3u);
  auto j = report::to_json(l);
  const auto& m = j["on_constraint"]["ad_inverse"];
  const std::vector<std::vector<std::string>> expect{
      {"x_s", "-u_s", "0"}, {"u_s", "x_s", "0"}, {"-u*x_s + u_s*x", "u*u_s + x*x_s", "1"}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(text_of(m[i][k]), expect[i][k]) << i << "," << k;
  const auto& u = j["upsilon"][0]["components"];
  EXPECT_EQ(text_of(u[0]), "-kappa^2");
  EXPECT_EQ(text_of(u[1]), "-2*kappa_s");
  EXPECT_EQ(text_of(u[2]), "2*kappa");
  EXPECT_FALSE(j.contains("killing_first_integral"));
  EXPECT_TRUE(j.contains("note"));
}

TEST(Laws, ProjectiveKillingAndReduced) {
  auto j = report::to_json(report::laws(ctx("sl2-action1"), "sigma_x^2/2"));
  EXPECT_TRUE(j["killing_form"]["semisimple"].get<bool>());
  EXPECT_EQ(j["killing_form"]["matrix"], "[[8, 0, 0], [0, 0, 4], [0, 4, 0]]");
  EXPECT_EQ(text_of(j["killing_first_integral"]["rhs"]), "c1^2 + 4*c2*c3");
  EXPECT_FALSE(j["reduced_system"].empty());
  EXPECT_FALSE(j.contains("on_constraint"));
}

TEST(Verify, DemosPass) {
  for (const std::string n : {"se2-curve", "sl2-action1", "sl2-action2", "sl2-action3"}) {
    auto v = report::verify(ctx(n), "", {});
    EXPECT_TRUE(v.pass()) << n;
    ASSERT_TRUE(v.trajectory.has_value());
    EXPECT_TRUE(has_note(v, "demo initial data (implementation choice)")) << n;
  }
}

TEST(Verify, RadicandFindingRecorded) {
  auto v = report::verify(ctx("sl2-action1"), "", {});
  EXPECT_TRUE(has_note(v, "radicand finding: beta = sqrt(c1^2 + 4 c2 c3) satisfies")) << v.notes.back();
}

TEST(Verify, SurfaceNeedsLagrangian) {
  EXPECT_THROW(report::verify(ctx("sl2-surface"), "", {}), std::invalid_argument);
  auto v = report::verify(ctx("sl2-surface"), "sigma_x^2/2 + kappa*sigma_t", {});
  EXPECT_TRUE(v.pass());
  EXPECT_FALSE(v.trajectory.has_value());
}

TEST(Verify, UnspecifiedInitialValuesNoted) {
  report::VerifyOptions opt;
  opt.span = 1.0;
  opt.init = {{"kappa", 1.0}};
  auto v = report::verify(ctx("se2-curve"), "kappa^2 + kappa_s^2", opt);
  EXPECT_TRUE(has_note(v, "initial value of kappa_s set to 0"));
}

TEST(Verify, CoarseStepFails) {
  report::VerifyOptions opt;
  opt.step = 0.5;
  opt.span = 50.0;
  EXPECT_FALSE(report::verify(ctx("se2-curve"), "", opt).pass());
}

TEST(Verify, JsonDeterministic) {
  auto a = report::render(report::verify(ctx("sl2-action3"), "", {}), report::Format::Json);
  auto b = report::render(report::verify(ctx("sl2-action3"), "", {}), report::Format::Json);
  EXPECT_EQ(a, b);
}

TEST(Verify, PlotCsv) {
  auto v = report::verify(ctx("se2-curve"), "", {});
  std::ostringstream os;
  report::write_plot_csv(os, v);
  const std::string header = os.str().substr(0, os.str().find('\n'));
  for (const std::string c : {"s", "kappa", "x", "u", "law1", "law3"}) EXPECT_NE(header.find(c), std::string::npos) << header;
}

TEST(Catalog, Outputs) {
  auto j = report::catalog_json();
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["entries"].size(), 5u);
  EXPECT_NE(report::catalog_text().find("sl2-surface"), std::string::npos);
  EXPECT_NE(report::catalog_latex().find("\\begin{tabular}"), std::string::npos);
}
