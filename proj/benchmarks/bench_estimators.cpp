#include "elvol/detrend.hpp"
#include "elvol/factor.hpp"
#include "elvol/rcv.hpp"
#include "elvol/semigroup.hpp"
#include "elvol/spde_sim.hpp"
#include "elvol/stationarity.hpp"

#include <benchmark/benchmark.h>

using namespace elvol;

namespace {

SimTruth hourly_panel(std::size_t days) {
    SimConfig c;
    c.modes = 3;
    c.zero_mode_lambda = -30.0;
    c.partition = DeliveryPartition::uniform(24);
    c.days = days;
    c.drift.level = 50.0;
    c.drift.weekly = {1.0, 1.0, 1.0, 1.0, 1.0, -3.0, -5.0};
    return simulate_heat_spde(c);
}

} // namespace

static void BM_SimulateHeat(benchmark::State& state) {
    SimConfig c;
    c.partition = DeliveryPartition::uniform(24);
    c.days = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_heat_spde(c));
    }
}
BENCHMARK(BM_SimulateHeat)->Arg(1000)->Arg(10000);

static void BM_LocalLinearDemean(benchmark::State& state) {
    const auto truth = hourly_panel(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(local_linear_demean(truth.panel));
    }
}
BENCHMARK(BM_LocalLinearDemean)->Arg(1000)->Arg(3000);

static void BM_RollingSemigroup(benchmark::State& state) {
    const auto truth = hourly_panel(static_cast<std::size_t>(state.range(0)));
    const Matrix rows = truth.panel.values() - truth.mean_path;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rolling_semigroup(rows));
    }
}
BENCHMARK(BM_RollingSemigroup)->Arg(1000)->Arg(3000);

static void BM_RcvRolling(benchmark::State& state) {
    const auto truth = hourly_panel(static_cast<std::size_t>(state.range(0)));
    const Matrix rows = truth.panel.values() - truth.mean_path;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rcv_naive(rows, {}));
    }
}
BENCHMARK(BM_RcvRolling)->Arg(1000)->Arg(3000);

static void BM_Eigendecompose(benchmark::State& state) {
    const auto d = state.range(0);
    const auto truth = hourly_panel(500);
    Matrix g = truth.panel.values().topRows(std::min<Eigen::Index>(500, 2 * d)).transpose();
    g = g.topRows(std::min<Eigen::Index>(g.rows(), d));
    const Matrix m = g * g.transpose();
    for (auto _ : state) {
        benchmark::DoNotOptimize(eigendecompose(m));
    }
}
BENCHMARK(BM_Eigendecompose)->Arg(24);

static void BM_KpssMultivariate(benchmark::State& state) {
    const auto truth = hourly_panel(2000);
    const Matrix rows = (truth.panel.values() - truth.mean_path).leftCols(state.range(0));
    kpss_multivariate(rows);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kpss_multivariate(rows));
    }
}
BENCHMARK(BM_KpssMultivariate)->Arg(3)->Arg(7);
BENCHMARK_MAIN();
