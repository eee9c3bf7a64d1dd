#include "marle/collision.hpp"
#include "marle/config.hpp"
#include "marle/linear_analysis.hpp"
#include "marle/solver.hpp"

#include <benchmark/benchmark.h>

using namespace marle;

namespace {

GridSpec grid_of(const std::string& name) { return preset(name).grid; }

void BM_SolveGamma(benchmark::State& state) {
    const JuttnerFunctions jf(PhaseGrid::build(grid_of("analysis")));
    const double eta = jf.eta_of_gamma(1.7);
    for (auto _ : state) benchmark::DoNotOptimize(jf.solve_gamma(eta));
}
BENCHMARK(BM_SolveGamma);

void BM_ApplyL(benchmark::State& state) {
    const LinearOperator op(Background::make(PhaseGrid::build(grid_of("analysis"))));
    CounterRng rng(1);
    const Field f = random_perturbation(op, rng);
    for (auto _ : state) benchmark::DoNotOptimize(op.apply_L(f));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(f.size()));
}
BENCHMARK(BM_ApplyL)->Unit(benchmark::kMillisecond);

void BM_SpectralGap(benchmark::State& state) {
    const LinearOperator op(Background::make(PhaseGrid::build(grid_of("analysis"))));
    for (auto _ : state) benchmark::DoNotOptimize(op.spectral_gap());
}
BENCHMARK(BM_SpectralGap)->Unit(benchmark::kMillisecond);

void BM_LocalEquilibrium(benchmark::State& state) {
    const RunConfig cfg = preset("relax0d");
    const auto bg = Background::make(PhaseGrid::build(cfg.grid));
    const Field F = relax0d_initial(*bg, 0.1, 1);
    for (auto _ : state) benchmark::DoNotOptimize(local_equilibrium(*bg->jf, F));
}
BENCHMARK(BM_LocalEquilibrium)->Unit(benchmark::kMicrosecond);

void BM_RelaxationStep(benchmark::State& state) {
    RunConfig cfg = preset("relax0d");
    cfg.collision.kind = static_cast<RelaxationKind>(state.range(0));
    const auto bg = Background::make(PhaseGrid::build(cfg.grid));
    const Field F = relax0d_initial(*bg, 0.1, 1);
    for (auto _ : state) benchmark::DoNotOptimize(relaxation_step(*bg->jf, F, 0.1, 1.0, cfg.collision));
    state.SetLabel(to_string(cfg.collision.kind));
}
BENCHMARK(BM_RelaxationStep)
    ->Arg(static_cast<int>(RelaxationKind::frozen))
    ->Arg(static_cast<int>(RelaxationKind::picard))
    ->Arg(static_cast<int>(RelaxationKind::conservative))
    ->Unit(benchmark::kMicrosecond);

void BM_TransportStep(benchmark::State& state) {
    Solver sol(preset("decay1d"));
    SlabField F = sol.initial_condition();
    for (auto _ : state) sol.transport_step(F, 0.05);
}
BENCHMARK(BM_TransportStep)->Unit(benchmark::kMillisecond);

void BM_StrangStep(benchmark::State& state) {
    Solver sol(preset("decay1d"));
    SlabField F = sol.initial_condition();
    for (auto _ : state) sol.step(F, 0.1, Scheme::strang);
}
BENCHMARK(BM_StrangStep)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
