#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>

#include "mframe/liegroup.hpp"
#include "mframe/numeric.hpp"
#include "mframe/parse.hpp"

#ifndef MFRAME_DEFAULT_CATALOG_DIR
#define MFRAME_DEFAULT_CATALOG_DIR ""
#endif
#ifndef MFRAME_INSTALL_CATALOG_DIR
#define MFRAME_INSTALL_CATALOG_DIR ""
#endif

namespace mframe::liegroup {

namespace fs = std::filesystem;
using nlohmann::json;
using symexpr::Bindings;
using symexpr::subst;

JetSpace GroupActionSpec::jet_space(int order) const {
  std::vector<jetcalc::DependentVar> deps;
  for (const auto& d : dependent) deps.push_back({SymbolKind::Jet, d});
  return JetSpace(independent, deps, order);
}

JetSpace GroupActionSpec::generator_space(int order) const {
  std::vector<jetcalc::DependentVar> deps;
  for (const auto& g : generators) deps.push_back({SymbolKind::Generator, g.name});
  if (constraint) deps.push_back({SymbolKind::Multiplier, constraint->multiplier});
  return JetSpace(independent, deps, order);
}

Bindings GroupActionSpec::bind_params(const std::map<std::string, Expr>& values) const {
  Bindings b;
  for (const auto& [k, v] : values) b[param(k)] = v;
  return b;
}

Expr GroupActionSpec::parse(const std::string& text) const { return symexpr::parse(text, registry); }

namespace {

std::string require_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    throw CatalogError(where + ": missing string field '" + key + "'");
  return j[key].get<std::string>();
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw CatalogError(where + ": missing field '" + key + "'");
  return j[key];
}

Rational parse_rational(const std::string& s, const std::string& where) {
  try {
    Rational q(s);
    q.canonicalize();
    return q;
  } catch (const std::exception&) {
    throw CatalogError(where + ": bad rational '" + s + "'");
  }
}

void check_zero(const Expr& e, const std::string& what) {
  auto v = symexpr::zero_test(e);
  if (!v.zero) throw CatalogError(what + " fails (residual " + std::to_string(v.max_residual) + ")");
}

}  // namespace

GroupActionSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CatalogError("cannot open catalog file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CatalogError(path + ": " + e.what());
  }
  GroupActionSpec spec;
  const std::string where = path;
  spec.name = require_string(j, "name", where);
  spec.description = j.value("description", "");
  auto& reg = spec.registry;

  for (const auto& v : require(j, "independent", where)) {
    std::string n = v.get<std::string>();
    if (n.size() != 1 || !symexpr::var_from_char(n[0]) || n == "T")
      throw CatalogError(where + ": unsupported independent variable '" + n + "'");
    spec.independent.push_back(*symexpr::var_from_char(n[0]));
    reg.add(SymbolKind::Independent, n);
  }
  for (const auto& v : require(j, "dependent", where)) {
    spec.dependent.push_back(v.get<std::string>());
    reg.add(SymbolKind::Jet, spec.dependent.back(), true);
  }
  for (const auto& v : require(j, "parameters", where)) {
    spec.parameters.push_back(v.get<std::string>());
    reg.add(SymbolKind::Parameter, spec.parameters.back());
    reg.add(SymbolKind::Parameter, "h" + spec.parameters.back());
  }
  if (j.contains("angle_parameters"))
    for (const auto& v : j["angle_parameters"]) spec.angle_parameters.push_back(v.get<std::string>());
  std::vector<std::pair<std::string, std::string>> derived_text;
  if (j.contains("derived_parameters"))
    for (const auto& [k, v] : j["derived_parameters"].items()) {
      derived_text.emplace_back(k, v.get<std::string>());
      reg.add(SymbolKind::Parameter, k);
      reg.add(SymbolKind::Parameter, "h" + k);
    }
  for (const auto& g : require(j, "generators", where)) {
    Generator gen;
    gen.name = require_string(g, "name", where);
    gen.latex = g.value("latex", symexpr::latex_name(gen.name));
    reg.add(SymbolKind::Generator, gen.name, true, gen.latex);
    spec.generators.push_back(gen);
  }
  for (std::size_t i = 1; i <= spec.parameters.size(); ++i)
    reg.add(SymbolKind::Constant, "c" + std::to_string(i));
  if (j.contains("constraint")) {
    ConstraintSpec c;
    c.multiplier = j["constraint"].value("multiplier", "lambda");
    reg.add(SymbolKind::Multiplier, c.multiplier, true);
    spec.constraint = c;
  }

  auto P = [&](const std::string& text, const std::string& field) {
    try {
      return spec.parse(text);
    } catch (const std::exception& e) {
      throw CatalogError(where + ": field " + field + ": " + e.what());
    }
  };

  Bindings rename2;
  for (const auto& p : spec.parameters) rename2[spec.param(p)] = Expr(spec.param2(p));
  Bindings derived, derived2;
  for (const auto& [k, t] : derived_text) {
    Expr e = P(t, "derived_parameters." + k);
    derived[spec.param(k)] = e;
    derived2[spec.param2(k)] = subst(e, rename2);
    spec.derived[k] = e;
  }
  Bindings both = derived;
  both.insert(derived2.begin(), derived2.end());

  for (const auto& [k, v] : require(j, "identity", where).items())
    spec.identity[k] = parse_rational(v.get<std::string>(), where + ": identity." + k);
  for (const auto& [k, v] : require(j, "action", where).items())
    spec.action[reg.resolve(k)] = subst(P(v.get<std::string>(), "action." + k), derived);
  for (const auto& [k, v] : require(j, "product", where).items())
    spec.product[k] = subst(P(v.get<std::string>(), "product." + k), both);
  for (const auto& [k, v] : require(j, "inverse", where).items())
    spec.inverse[k] = subst(P(v.get<std::string>(), "inverse." + k), derived);
  for (const auto& f : require(j, "infinitesimals", where)) {
    VectorField v;
    for (const auto& [k, e] : f.items()) v.coeff[reg.resolve(k)] = P(e.get<std::string>(), "infinitesimals");
    spec.infinitesimals.push_back(v);
  }
  for (const auto& n : require(j, "normalization", where)) {
    Normalization nm;
    nm.coordinate = reg.resolve(require_string(n, "coordinate", where));
    nm.value = parse_rational(require_string(n, "value", where), where + ": normalization");
    spec.normalizations.push_back(nm);
  }
  for (const auto& [k, v] : require(j, "frame", where).items()) spec.frame[k] = P(v.get<std::string>(), "frame." + k);
  if (j.contains("domain"))
    for (const auto& d : j["domain"]) spec.positive.push_back(P(d.get<std::string>(), "domain"));
  for (std::size_t i = 0; i < spec.generators.size(); ++i)
    spec.generators[i].coordinate = reg.resolve(require_string(j["generators"][i], "coordinate", where));
  if (j.contains("relations"))
    for (const auto& r : j["relations"]) spec.relations.push_back(reg.resolve(r.get<std::string>()));
  if (spec.constraint) {
    const auto& c = j["constraint"];
    spec.constraint->expr = P(require_string(c, "expr", where), "constraint.expr");
    spec.constraint->sign = c.value("sign", 1);
    spec.constraint->kind = c.value("kind", "parametrization");
  }
  spec.semisimple = j.value("semisimple", true);

  std::size_t r = spec.parameters.size();
  if (spec.infinitesimals.size() != r) throw CatalogError(where + ": need one infinitesimal per parameter");
  if (spec.normalizations.size() != r) throw CatalogError(where + ": need one normalization per parameter");
  for (const auto& p : spec.parameters) {
    if (!spec.identity.count(p) || !spec.product.count(p) || !spec.inverse.count(p) || !spec.frame.count(p))
      throw CatalogError(where + ": parameter '" + p + "' lacks identity, product, inverse or frame");
  }
  validate(spec);
  return spec;
}

void validate(const GroupActionSpec& spec) {
  const std::string& n = spec.name;
  Bindings at_identity, g_to_h, inv_as_h, to_product;
  for (const auto& p : spec.parameters) {
    at_identity[spec.param(p)] = Expr(spec.identity.at(p));
    g_to_h[spec.param(p)] = Expr(spec.param2(p));
    inv_as_h[spec.param2(p)] = spec.inverse.at(p);
    to_product[spec.param(p)] = spec.product.at(p);
  }
  for (const auto& p : spec.parameters) {
    check_zero(subst(spec.product.at(p), at_identity) - Expr(spec.param2(p)),
               n + ": product(identity, g) = g for " + p);
    check_zero(subst(spec.product.at(p), inv_as_h) - Expr(spec.identity.at(p)),
               n + ": product(g, inverse(g)) = identity for " + p);
  }
  // g.(h.z) = (gh).z on base coordinates
  Bindings h_action;
  for (const auto& [z, e] : spec.action) h_action[z] = subst(e, g_to_h);
  for (const auto& [z, e] : spec.action) {
    check_zero(subst(e, at_identity) - Expr(z), n + ": identity acts trivially on " + z.text());
    check_zero(subst(e, h_action) - subst(e, to_product), n + ": left action on " + z.text());
  }
  for (std::size_t j = 0; j < spec.parameters.size(); ++j) {
    const Symbol pj = spec.param(spec.parameters[j]);
    for (const auto& [z, e] : spec.action) {
      Expr tangent = subst(symexpr::diff(e, pj), at_identity);
      check_zero(tangent - spec.infinitesimals[j].at(z),
                 n + ": infinitesimal " + std::to_string(j + 1) + " on " + z.text());
    }
  }
}

std::string default_catalog_dir() {
  if (const char* env = std::getenv("MFRAME_CATALOG_DIR"); env && *env) return env;
  std::error_code ec;
  if (fs::is_directory(MFRAME_DEFAULT_CATALOG_DIR, ec)) return MFRAME_DEFAULT_CATALOG_DIR;
  return MFRAME_INSTALL_CATALOG_DIR;
}

std::vector<std::string> catalog_names(const std::string& dir0) {
  std::string dir = dir0.empty() ? default_catalog_dir() : dir0;
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec))
    if (e.path().extension() == ".json") out.push_back(e.path().stem().string());
  if (ec) throw CatalogError("cannot read catalog directory " + dir);
  std::sort(out.begin(), out.end());
  return out;
}

const GroupActionSpec& catalog(const std::string& name, const std::string& dir0) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<GroupActionSpec>> cache;
  std::string dir = dir0.empty() ? default_catalog_dir() : dir0;
  fs::path file = fs::path(dir) / (name + ".json");
  std::string key = file.string();
  std::lock_guard lock(mu);
  if (auto it = cache.find(key); it != cache.end()) return *it->second;
  std::error_code ec;
  if (name.empty() || name.find('/') != std::string::npos || !fs::is_regular_file(file, ec))
    throw CatalogError("unknown catalog entry '" + name + "'");
  auto spec = std::make_unique<GroupActionSpec>(load_spec(key));
  if (spec->name != name) throw CatalogError(key + ": entry name '" + spec->name + "' does not match file");
  return *cache.emplace(key, std::move(spec)).first->second;
}

}  // namespace mframe::liegroup
