#include <benchmark/benchmark.h>

#include "towlab/comparison.hpp"
#include "towlab/dpp.hpp"
#include "towlab/game.hpp"
#include "towlab/geometry.hpp"

using namespace towlab;

namespace {

Vec pt(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

void BM_DppApply(benchmark::State& state) {
  const Variant v = state.range(0) == 0 ? Variant::orthogonal : Variant::fullball;
  const double eps = 0.05;
  const Domain d = Domain::box_from_corners(pt(-0.75, -0.75), pt(0.75, 0.75), eps);
  GridField u = GridField::make(d, eps / 2);
  u.fill([](const Vec& y) { return y[0] + 0.5 * y[0] * y[1]; });
  const DppScheme scheme(u, ExponentField::constant(4.0), DppSetup{.variant = v});
  std::vector<double> out(u.size());
  for (auto _ : state) {
    scheme.apply(u.values(), out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(scheme.interior().size()));
  state.SetLabel(to_string(v));
}
BENCHMARK(BM_DppApply)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CoupledRotation(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  std::vector<UnitVector> dirs;
  for (int k = 0; k < 256; ++k) dirs.emplace_back(sample_unit_sphere(n, rng));
  std::size_t k = 0;
  for (auto _ : state) {
    const CoupledRotation c = coupled_rotation(dirs[k % 256], dirs[(k + 1) % 256]);
    benchmark::DoNotOptimize(c.p_x.matrix().data());
    ++k;
  }
}
BENCHMARK(BM_CoupledRotation)->Arg(2)->Arg(3)->Arg(5);

void BM_FEval(benchmark::State& state) {
  const ComparisonParams p = constants_recipe(RecipeInputs{0.45, 0.1, 0.5, 1.0, 0.1, 0.1, 0.9});
  const ComparisonFunction cf(p, 0.3 * p.omega1 * 10.0 / static_cast<double>(p.N));
  const ExponentField field = ExponentField::radial_holder(4.0, 1.2, Vec::Zero(2), 0.45);
  const QuadratureRule rule = ball_quadrature(2, 16);
  const Vec x = pt(0.3 * p.omega1, 0.0), z = pt(-0.2 * p.omega1, 0.01);
  const UnitVector nx = UnitVector::axis(2, 0, -1.0), nz = UnitVector::axis(2, 0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(F_eval(cf, field, Variant::orthogonal, rule, x, z, nx, nz));
}
BENCHMARK(BM_FEval);

void BM_StepCoupled(benchmark::State& state) {
  const GameConfig cfg{.variant = Variant::orthogonal,
                       .domain = Domain::ball(Vec::Zero(2), 100.0, 0.01),
                       .field = ExponentField::radial_holder(3.0, 2.0, Vec::Zero(2), 0.5),
                       .doubled_payoff = 1.0};
  const Strategy ours = Strategy::pull_together(), opp = Strategy::slight_turn();
  Rng rng(2);
  const Vec x = pt(0.5, 0.0), z = pt(-0.5, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(step_coupled(x, z, ours, opp, cfg, rng).x.data());
}
BENCHMARK(BM_StepCoupled);

}  // namespace
BENCHMARK_MAIN();
