#include <benchmark/benchmark.h>

#include "ambres/gnss.hpp"
#include "ambres/montecarlo.hpp"
#include "ambres/voronoi.hpp"

using namespace ambres;

namespace {

gnss::Scenario scenario(gnss::MeasurementSet set, int epochs) {
  gnss::Scenario s;
  s.measurement_set = set;
  s.sigma_delta_iono = 0.005;
  s.n_epochs = epochs;
  s.satellites = gnss::synthetic_constellation(7, epochs, 3);
  return s;
}

void BM_BuildModel(benchmark::State& state) {
  const auto s = scenario(gnss::MeasurementSet::L1L2L5, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gnss::build_model(s));
}
BENCHMARK(BM_BuildModel)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_RelevantVectors(benchmark::State& state) {
  const auto model = gnss::build_model(scenario(gnss::MeasurementSet::L1L2, 10));
  for (auto _ : state) benchmark::DoNotOptimize(relevant_vectors(model));
}
BENCHMARK(BM_RelevantVectors)->Unit(benchmark::kMillisecond);

void BM_MapDecision(benchmark::State& state) {
  const auto model = gnss::build_model(scenario(gnss::MeasurementSet::L1L2L5, 10));
  const Decoder dec(model);
  const IntVector truth = IntVector::Zero(model.p_delta());
  std::uint64_t seed = 1;
  for (auto _ : state) {
    const auto nu = gnss::simulate_float_solution(model, truth, seed++);
    benchmark::DoNotOptimize(dec.map(nu));
  }
}
BENCHMARK(BM_MapDecision)->Unit(benchmark::kMicrosecond);

void BM_MonteCarlo(benchmark::State& state) {
  const auto model = gnss::build_model(scenario(gnss::MeasurementSet::L1L2, 10));
  const auto q = ProposalForm::identity_of(model);
  for (auto _ : state) benchmark::DoNotOptimize(mc_rate(model, std::nullopt, RateTarget::Beta, q, 10000, 1));
}
BENCHMARK(BM_MonteCarlo)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
