#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mframe/report.hpp"

namespace {

using namespace mframe;

enum Exit { kOk = 0, kUsage = 2, kParse = 3, kDerivation = 4, kNumeric = 5 };

struct RunConfig {
  std::string entry;
  std::string lagrangian;
  std::string format = "json";
  std::string out;
  std::string plot;
  std::string catalog_dir;
  std::optional<double> step;
  std::optional<double> span;
  std::vector<std::string> init;
  std::uint64_t seed = 0xfd;
};

report::Format parse_format(const std::string& f) {
  if (f == "latex") return report::Format::Latex;
  if (f == "text") return report::Format::Text;
  return report::Format::Json;
}

int emit(const RunConfig& cfg, const std::string& body) {
  if (cfg.out.empty()) {
    std::cout << body;
    return kOk;
  }
  std::ofstream os(cfg.out, std::ios::binary);
  if (!os) {
    std::cerr << "cannot write " << cfg.out << "\n";
    return kUsage;
  }
  os << body;
  return kOk;
}

std::map<std::string, double> parse_init(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& it : items) {
    auto eq = it.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--init", "expected name=value, got " + it);
    std::size_t used = 0;
    const std::string v = it.substr(eq + 1);
    double x = 0.0;
    try {
      x = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) throw CLI::ValidationError("--init", "not a number: " + v);
    out[it.substr(0, eq)] = x;
  }
  return out;
}

const liegroup::GroupActionSpec& entry(const RunConfig& cfg) {
  if (cfg.entry.empty()) throw liegroup::CatalogError("--entry is required");
  return liegroup::catalog(cfg.entry, cfg.catalog_dir);
}

int run_command(const std::string& cmd, const RunConfig& cfg) {
  const auto f = parse_format(cfg.format);
  if (cmd == "catalog") {
    switch (f) {
      case report::Format::Json:
        return emit(cfg, report::catalog_json(cfg.catalog_dir).dump(2) + "\n");
      case report::Format::Latex:
        return emit(cfg, report::catalog_latex(cfg.catalog_dir));
      case report::Format::Text:
        return emit(cfg, report::catalog_text(cfg.catalog_dir));
    }
  }
  const auto& spec = entry(cfg);
  const auto& ctx = varcalc::context(spec);
  if (cmd == "derive") return emit(cfg, report::render(report::derive(ctx, cfg.lagrangian), f));
  if (cmd == "laws") return emit(cfg, report::render(report::laws(ctx, cfg.lagrangian), f));
  report::VerifyOptions opt;
  opt.step = cfg.step;
  opt.span = cfg.span;
  opt.init = parse_init(cfg.init);
  opt.seed = cfg.seed;
  auto v = report::verify(ctx, cfg.lagrangian, opt);
  int rc = emit(cfg, report::render(v, f));
  if (rc != kOk) return rc;
  if (!cfg.plot.empty()) {
    std::ofstream os(cfg.plot, std::ios::binary);
    if (!os) {
      std::cerr << "cannot write " << cfg.plot << "\n";
      return kUsage;
    }
    report::write_plot_csv(os, v);
  }
  if (!v.pass()) {
    for (const auto& c : v.report.checks)
      if (!c.informational && !c.pass) std::cerr << fmt::format("check failed: {} (residual {:.3e} > {:.1e})\n", c.name, c.residual, c.tolerance);
    return kNumeric;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving frames, invariant Euler-Lagrange equations and Noether conservation laws"};
  app.require_subcommand(1);
  RunConfig cfg;
  auto common = [&](CLI::App* sub, bool needs_entry) {
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "latex", "text"}));
    sub->add_option("--out", cfg.out, "Output file (default standard output)");
    sub->add_option("--catalog-dir", cfg.catalog_dir, "Catalog directory")->check(CLI::ExistingDirectory);
    if (needs_entry) sub->add_option("--entry", cfg.entry, "Catalog entry")->required();
  };
  auto* catalog = app.add_subcommand("catalog", "List catalog entries with generators and normalizations");
  common(catalog, false);
  auto* derive = app.add_subcommand("derive", "Invariant Euler-Lagrange equations, syzygies and boundary coefficients");
  common(derive, true);
  derive->add_option("--lagrangian", cfg.lagrangian, "Lagrangian in the generating invariants")->required();
  auto* laws = app.add_subcommand("laws", "Noether conservation laws, Killing first integral and reduced system");
  common(laws, true);
  laws->add_option("--lagrangian", cfg.lagrangian, "Lagrangian in the generating invariants")->required();
  auto* verify = app.add_subcommand("verify", "Symbolic oracles and numeric checks along extremals");
  common(verify, true);
  verify->add_option("--lagrangian", cfg.lagrangian, "Lagrangian (default: the entry's demo)");
  verify->add_option("--step", cfg.step, "RK4 step")->check(CLI::PositiveNumber);
  verify->add_option("--span", cfg.span, "Integration span")->check(CLI::NonNegativeNumber);
  verify->add_option("--init", cfg.init, "Initial value override name=value")->delimiter(',');
  verify->add_option("--seed", cfg.seed, "Seed for random sampling");
  verify->add_option("--plot", cfg.plot, "Write plot data (CSV) to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run_command(cmd, cfg);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const liegroup::CatalogError& e) {
    std::cerr << "unknown entry: " << e.what() << "\n";
    return kUsage;
  } catch (const symexpr::ParseError& e) {
    std::cerr << "parse error at " << e.position() << ": " << e.what() << "\n";
    return kParse;
  } catch (const symexpr::UnknownSymbol& e) {
    std::cerr << "parse error: unknown symbol " << e.name() << "\n";
    return kParse;
  } catch (const varcalc::LagrangianError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const varcalc::VerificationFailure& e) {
    std::cerr << "derivation check failed: " << e.what() << "\n";
    return kDerivation;
  } catch (const numlab::BlowUp& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const numlab::NonExplicitSystem& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const numlab::MissingVariable& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "derivation failed: " << e.what() << "\n";
    return kDerivation;
  }
}
