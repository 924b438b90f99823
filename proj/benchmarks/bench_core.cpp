#include <benchmark/benchmark.h>

#include "iadp/sim.hpp"

using namespace iadp;

namespace {

StateVec x0() { return (StateVec(2) << 0.7, -0.4).finished(); }

void BM_GradPhi(benchmark::State& state) {
  const BasisSet B = BasisSet::default_pendulum();
  const StateVec x = x0();
  for (auto _ : state) benchmark::DoNotOptimize(B.grad_phi(x));
}
BENCHMARK(BM_GradPhi);

void BM_PenaltyW(benchmark::State& state) {
  const InputVec u = InputVec::Constant(1, 1.3);
  for (auto _ : state) benchmark::DoNotOptimize(penalty_W(u, 2.0));
}
BENCHMARK(BM_PenaltyW);

void BM_Rk4Step(benchmark::State& state) {
  const ControlAffinePlant p = plants::pendulum();
  const DisturbanceFn d = [](const StateVec& x, double) {
    return Vector::Constant(1, -0.3906 * x(0) * std::sin(1.0051 * x(1)));
  };
  StateVec x = x0();
  const InputVec u = InputVec::Constant(1, 0.1);
  for (auto _ : state) {
    x = rk4_step(p, x, u, d, 0.0, 1e-3);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_Rk4Step);

void BM_WeightDerivative(benchmark::State& state) {
  ExperienceBuffer buf(8, 6, InsertionPolicy::sequential_fill);
  for (int l = 0; l < 8; ++l) buf.try_insert({Vector::Random(6), 0.1 * l});
  const LearnerGains gains{1e-4 * Matrix::Identity(6, 6), 5.0, 3.0};
  const CriticWeights w{Vector::Random(6)};
  const RegressionPair cur{Vector::Random(6), 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(weight_derivative(w, cur, buf, gains));
}
BENCHMARK(BM_WeightDerivative);

void BM_EnrichInsert(benchmark::State& state) {
  ExperienceBuffer buf(8, 6, InsertionPolicy::sigma_min_enrich);
  for (int l = 0; l < 8; ++l) buf.try_insert({Vector::Random(6), 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(buf.try_insert({Vector::Random(6), 0.0}));
}
BENCHMARK(BM_EnrichInsert);

void BM_Episode(benchmark::State& state) {
  SimConfig cfg;
  cfg.controller = static_cast<ControllerKind>(state.range(0));
  cfg.t_end = 5.0;
  cfg.disturbances = {VanishingDisturbance{-0.3906, 1.0051}};
  for (auto _ : state) benchmark::DoNotOptimize(run_episode(cfg).final_E_u());
  state.SetItemsProcessed(state.iterations() * 5000);
}
BENCHMARK(BM_Episode)
    ->Arg(static_cast<int>(ControllerKind::iadp))
    ->Arg(static_cast<int>(ControllerKind::zsadp))
    ->Arg(static_cast<int>(ControllerKind::tadp))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
