#include <numbers>

#include <benchmark/benchmark.h>

#include "timeless/classical_liouville.hpp"
#include "timeless/extended_hj.hpp"
#include "timeless/generalized_constraints.hpp"
#include "timeless/quantum_pw.hpp"
#include "timeless/random.hpp"

namespace {

using namespace timeless;

void BM_HistoryState(benchmark::State& state) {
  const auto d = state.range(0);
  const pw::ClockModel clock = pw::build_cyclic_clock(d, 0.5);
  ComplexMatrix hs = ComplexMatrix::Zero(2, 2);
  hs(1, 1) = clock.frequency();
  const ComplexVector phi0 = ComplexVector::Constant(2, 1.0 / std::sqrt(2.0));
  for (auto _ : state) {
    const pw::HistoryState h = pw::build_history_state(hs, phi0, clock);
    benchmark::DoNotOptimize(pw::stationarity_residual(h, hs));
  }
}
BENCHMARK(BM_HistoryState)->RangeMultiplier(2)->Range(8, 128);

void BM_PartialTrace(benchmark::State& state) {
  const auto d = state.range(0);
  Rng rng(1);
  const pw::DensityMatrix rho = pw::DensityMatrix::pure(rng.unit_vector(2 * d));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pw::von_neumann_entropy(pw::partial_trace(rho, 2, d, pw::Subsystem::System)));
  }
}
BENCHMARK(BM_PartialTrace)->RangeMultiplier(2)->Range(8, 128);

void BM_LeapfrogHarmonic(benchmark::State& state) {
  const HamiltonianField h = harmonic_oscillator(1, 1);
  PhaseSpacePoint z(2);
  z << 1.0, 0.0;
  for (auto _ : state) {
    classical::leapfrog_step(h, z, 1e-3);
    benchmark::DoNotOptimize(z.data());
  }
}
BENCHMARK(BM_LeapfrogHarmonic);

void BM_PropagateSamples(benchmark::State& state) {
  const HamiltonianField h = harmonic_oscillator(1, 1);
  PhaseSpacePoint c(2);
  c << 1.0, 0.0;
  const auto blob = classical::gaussian_samples(c, 0.2, static_cast<int>(state.range(0)), 5.0, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(classical::propagate_density(h, blob, std::numbers::pi / 2, 1e-2).density.center());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_PropagateSamples)->Arg(11)->Arg(21)->Arg(41);

void BM_ExtendedFlow(benchmark::State& state) {
  const HamiltonianField ext = hj::extend(harmonic_oscillator(1, 1));
  hj::ExtendedPhaseState x0;
  x0.q = RealVector::Constant(1, 1.0);
  x0.p = RealVector::Zero(1);
  x0.p0 = -0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hj::extended_flow(ext, x0, 10.0, 1e-3, 10000).p0_drift);
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_ExtendedFlow);

void BM_HjTimeQuartic(benchmark::State& state) {
  const SystemId sys = parse_system_id("quartic(1,0.5)");
  for (auto _ : state) benchmark::DoNotOptimize(hj::hj_time(sys, 0.8, 1.0, 1e-6));
}
BENCHMARK(BM_HjTimeQuartic);

void BM_ConstraintEigenspace(benchmark::State& state) {
  const auto d = state.range(0);
  const ComplexMatrix g = constraints::cyclic_translation_generator(d);
  const constraints::ConstraintSpec spec{g, g, 0.0, "momentum"};
  for (auto _ : state) benchmark::DoNotOptimize(constraints::build_constraint_state(spec, 1e-8).size());
}
BENCHMARK(BM_ConstraintEigenspace)->Arg(4)->Arg(8)->Arg(16);

}  // namespace
BENCHMARK_MAIN();
