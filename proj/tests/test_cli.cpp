#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(MFRAME_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

}  // namespace

TEST(Cli, Catalog) {
  auto r = run("catalog");
  EXPECT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["entries"].size(), 5u);
}

TEST(Cli, DeriveProjective) {
  auto r = run("derive --entry sl2-action1 --lagrangian 'sigma_x^2/2'");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["euler_lagrange"][0]["operator_form"][0]["operator"]["text"], "-D_x^3 - 2*sigma*D_x - sigma_x");
  auto l = run("derive --entry sl2-action1 --lagrangian 'sigma_x^2/2' --format latex");
  EXPECT_EQ(l.code, 0);
  EXPECT_NE(l.out.find("-D_{x}^{3} - 2 \\sigma D_{x} - \\sigma_{x}"), std::string::npos) << l.out;
}

TEST(Cli, LawsElastica) {
  auto r = run("laws --entry se2-curve --lagrangian 'kappa^2' --format text");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("(x_s, -u_s, 0)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("upsilon_s = (-kappa^2, -2*kappa_s, 2*kappa)"), std::string::npos) << r.out;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("derive --entry nosuch --lagrangian 'sigma'").code, 2);
  EXPECT_EQ(run("derive --entry sl2-action1").code, 2);
  EXPECT_EQ(run("derive --entry sl2-action1 --lagrangian 'sigma' --format pdf").code, 2);
  EXPECT_EQ(run("derive --entry sl2-action1 --lagrangian 'sigma_x^'").code, 3);
  EXPECT_EQ(run("derive --entry sl2-action1 --lagrangian 'nosuch'").code, 3);
  EXPECT_EQ(run("verify --entry se2-curve --init nosuch=1").code, 5);
  EXPECT_EQ(run("verify --entry se2-curve --init kappa=abc").code, 2);
  EXPECT_EQ(run("verify --entry se2-curve --step -1").code, 2);
  EXPECT_EQ(run("verify --entry sl2-surface").code, 2);
}

TEST(Cli, VerifyExitMatchesReport) {
  for (const std::string args : {"verify --entry sl2-action1", "verify --entry se2-curve --step 0.5 --span 50"}) {
    auto r = run(args);
    auto j = nlohmann::json::parse(r.out);
    bool pass = true;
    for (const auto& c : j["checks"])
      if (!c.value("informational", false)) pass = pass && c["pass"].get<bool>();
    EXPECT_EQ(j["pass"].get<bool>(), pass) << args;
    EXPECT_EQ(r.code, pass ? 0 : 5) << args;
  }
}

TEST(Cli, DeterministicJson) {
  for (const std::string args : {"catalog", "derive --entry sl2-surface --lagrangian 'sigma_x^2/2 + kappa*sigma_t'",
                                 "laws --entry se2-curve --lagrangian 'kappa^2'", "verify --entry sl2-action2"}) {
    auto a = run(args), b = run(args);
    EXPECT_EQ(a.code, 0) << args;
    EXPECT_EQ(a.out, b.out) << args;
  }
}
