#include <benchmark/benchmark.h>

#include "stiefelgd/runner.hpp"

using namespace stiefelgd;

namespace {

EnergyModel model_for(int dimension, int n, int orbitals) {
  ModelConfig m;
  m.type = orbitals == 1 ? "gpe" : "coupled";
  m.dimension = dimension;
  m.n = n;
  m.kappa = orbitals == 1 ? 100.0 : 10.0;
  m.n_orbitals = orbitals;
  return build_model(m);
}

void BM_Retraction(benchmark::State& state, Retraction kind) {
  const EnergyModel model = model_for(1, static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const Frame phi = initial_guess(model.grid(), static_cast<int>(state.range(1)), 1);
  const Frame eta = project_tangent_h(phi, initial_guess(model.grid(), static_cast<int>(state.range(1)), 2));
  for (auto _ : state) benchmark::DoNotOptimize(retract(kind, phi, 0.1 * eta));
}
BENCHMARK_CAPTURE(BM_Retraction, polar, Retraction::polar)->Args({4096, 4})->Args({65536, 8});
BENCHMARK_CAPTURE(BM_Retraction, qr_mgs, Retraction::qr_mgs)->Args({4096, 4})->Args({65536, 8});
BENCHMARK_CAPTURE(BM_Retraction, qr_cholesky, Retraction::qr_cholesky)->Args({4096, 4})->Args({65536, 8});

void BM_ExactGradient(benchmark::State& state) {
  const int orbitals = static_cast<int>(state.range(1));
  const EnergyModel model = model_for(2, static_cast<int>(state.range(0)), orbitals);
  const Frame phi = initial_guess(model.grid(), orbitals, 1);
  for (auto _ : state) benchmark::DoNotOptimize(riemannian_gradient(model, phi, SolveConfig{}));
}
BENCHMARK(BM_ExactGradient)->Args({64, 1})->Args({64, 3})->Unit(benchmark::kMillisecond);

void BM_InexactGradient(benchmark::State& state) {
  const EnergyModel model = model_for(2, 64, 3);
  const Frame phi = initial_guess(model.grid(), 3, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(inexact_gradient(model, phi, static_cast<int>(state.range(0)), SolveConfig{}));
  }
}
BENCHMARK(BM_InexactGradient)->Arg(1)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Cg(benchmark::State& state) {
  const EnergyModel model = model_for(2, static_cast<int>(state.range(0)), 1);
  const Frame phi = initial_guess(model.grid(), 1, 1);
  const DiscreteOperatorA op(model, phi);
  SolveConfig config;
  config.preconditioner = static_cast<PreconditionerKind>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(solve(op, phi, config));
}
BENCHMARK(BM_Cg)
    ->Args({64, static_cast<int>(PreconditionerKind::none)})
    ->Args({64, static_cast<int>(PreconditionerKind::diagonal)})
    ->Args({64, static_cast<int>(PreconditionerKind::kinetic_shift)})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
