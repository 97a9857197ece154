// Serial reference vs OpenMP kernels on small grids. Worker count is the
// benchmark argument.

#include "ldaction/ld.hpp"
#include "ldaction/sections.hpp"

#include <benchmark/benchmark.h>

using namespace ldaction;

namespace {

SectionSpec plane(double xmax, double ymax, std::size_t n) {
    SectionSpec s;
    s.axis1 = {-xmax, xmax, n};
    s.axis2 = {-ymax, ymax, n};
    return s;
}

LDParams params(double tau, double dt) {
    LDParams p;
    p.tau_f = p.tau_b = tau;
    p.dt = dt;
    return p;
}

const GridStates& saddle_grid() {
    static const GridStates g = lift_grid(Saddle{}, plane(1.0, 1.0, 64));
    return g;
}

const GridStates& pt_grid() {
    static const GridStates g = [] {
        SectionSpec s = plane(1.0, 0.85, 48);
        s.kind = SectionKind::energy_section;
        s.energy = 0.1;
        return lift_grid(ProtonTransfer{}, s);
    }();
    return g;
}

const GridStates& duffing_grid() {
    static const GridStates g = lift_grid(Duffing{}, plane(1.7, 0.9, 32));
    return g;
}

LDParams duffing_params() {
    LDParams p = params(10.0, 0.005);
    p.method = Method::euler_maruyama;
    p.ensemble = Ensemble{4, 2021};
    return p;
}

void BM_SaddleSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(ld_field_serial(Saddle{}, saddle_grid(), params(4.0, 1e-3)));
    state.SetItemsProcessed(state.iterations() * saddle_grid().feasible_count());
}

void BM_SaddleParallel(benchmark::State& state) {
    const int workers = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(ld_field(Saddle{}, saddle_grid(), params(4.0, 1e-3), workers));
    state.SetItemsProcessed(state.iterations() * saddle_grid().feasible_count());
}

void BM_ProtonTransferSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(ld_field_serial(ProtonTransfer{}, pt_grid(), params(5.0, 1e-3)));
    state.SetItemsProcessed(state.iterations() * pt_grid().feasible_count());
}

void BM_ProtonTransferParallel(benchmark::State& state) {
    const int workers = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(ld_field(ProtonTransfer{}, pt_grid(), params(5.0, 1e-3), workers));
    state.SetItemsProcessed(state.iterations() * pt_grid().feasible_count());
}

void BM_DuffingSerial(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(stochastic_ld_field_serial(Duffing{0.025}, duffing_grid(), duffing_params()));
    state.SetItemsProcessed(state.iterations() * duffing_grid().feasible_count());
}

void BM_DuffingParallel(benchmark::State& state) {
    const int workers = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(stochastic_ld_field(Duffing{0.025}, duffing_grid(), duffing_params(), workers));
    state.SetItemsProcessed(state.iterations() * duffing_grid().feasible_count());
}

}  // namespace

BENCHMARK(BM_SaddleSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SaddleParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ProtonTransferSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ProtonTransferParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DuffingSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DuffingParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
