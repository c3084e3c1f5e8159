#include <benchmark/benchmark.h>

#include "mframe/numlab.hpp"

using namespace mframe;

namespace {

const liegroup::GroupActionSpec& entry(const std::string& n) { return liegroup::catalog(n); }
const varcalc::Context& ctx(const std::string& n) { return varcalc::context(entry(n)); }

void BM_ParseCanonicalize(benchmark::State& state) {
  const auto& s = entry("sl2-action1");
  for (auto _ : state) benchmark::DoNotOptimize(s.parse("(u_xxx/u_x - 3/2*(u_xx/u_x)^2)^2 + u_xx^3/(u_x + u)"));
}
BENCHMARK(BM_ParseCanonicalize);

void BM_TotalDerivativeSchwarzian(benchmark::State& state) {
  const auto& s = entry("sl2-action1");
  auto js = s.jet_space();
  auto e = s.parse("u_xxx/u_x - 3/2*(u_xx/u_x)^2");
  for (auto _ : state) benchmark::DoNotOptimize(jetcalc::total_derivative(e, symexpr::MultiIndex(symexpr::Var::x, state.range(0)), js));
}
BENCHMARK(BM_TotalDerivativeSchwarzian)->Arg(1)->Arg(3)->Arg(5);

void BM_InvariantEL(benchmark::State& state) {
  const auto& c = ctx("sl2-action3");
  auto L = varcalc::parse_lagrangian(c, "sigma^2/2 + eta^2/2 + eta_s*sigma_s");
  for (auto _ : state) benchmark::DoNotOptimize(varcalc::invariant_el(c, L));
}
BENCHMARK(BM_InvariantEL);

void BM_NoetherLaws(benchmark::State& state) {
  const auto& c = ctx("sl2-action1");
  auto L = varcalc::parse_lagrangian(c, "sigma_x^2/2");
  for (auto _ : state) benchmark::DoNotOptimize(varcalc::noether_laws(c, L));
}
BENCHMARK(BM_NoetherLaws);

void BM_IntegrateElastica(benchmark::State& state) {
  const auto& c = ctx("se2-curve");
  auto L = varcalc::parse_lagrangian(c, "kappa^2");
  auto sys = numlab::with_curve(numlab::explicit_system(varcalc::eliminate_multiplier(c, varcalc::invariant_el(c, L), L)), c);
  auto init = numlab::resolve_init(sys, {{"kappa", 1.0}, {"kappa_s", 0.0}});
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(numlab::integrate_el(sys, init, 10.0, h));
  state.SetItemsProcessed(state.iterations() * 10 * state.range(0));
}
BENCHMARK(BM_IntegrateElastica)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_CheckConstancy(benchmark::State& state) {
  const auto& c = ctx("sl2-action1");
  auto L = varcalc::parse_lagrangian(c, "sigma_x^2/2");
  auto sys = numlab::with_curve(numlab::explicit_system(varcalc::invariant_el(c, L)), c);
  auto d = numlab::conservation_demo("sl2-action1");
  auto t = numlab::integrate_el(sys, numlab::resolve_init(sys, d.init), d.span, d.h);
  auto laws = varcalc::noether_laws(c, L);
  for (auto _ : state) benchmark::DoNotOptimize(numlab::check_constancy(laws, t));
}
BENCHMARK(BM_CheckConstancy)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
