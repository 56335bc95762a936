#include <benchmark/benchmark.h>

#include <vector>

#include "ifcast/channel.hpp"
#include "ifcast/emd.hpp"
#include "ifcast/fbl.hpp"
#include "ifcast/lstm.hpp"
#include "ifcast/transformer.hpp"

namespace {

using namespace ifcast;

ScenarioConfig bench_scenario(std::size_t length) {
    ScenarioConfig sc;
    sc.desired.mean_power_db = 20.0;
    const double inrs[] = {5.0, 2.0, 0.0, -3.0, -10.0, 1.0};
    for (double inr : inrs) {
        LinkConfig link;
        link.mean_power_db = inr;
        sc.interferers.push_back(link);
    }
    sc.trace_length = length;
    sc.rng_seed = 7;
    return sc;
}

void BM_GenerateFading(benchmark::State& state) {
    LinkConfig link;
    const auto length = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate_fading(link, length, 11));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateFading)->Arg(200)->Arg(2000);

void BM_ComposeScenario(benchmark::State& state) {
    ScenarioConfig sc = bench_scenario(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(compose_received(sc));
    }
}
BENCHMARK(BM_ComposeScenario)->Arg(200);

void BM_EmdDecompose(benchmark::State& state) {
    ScenarioConfig sc = bench_scenario(static_cast<std::size_t>(state.range(0)));
    std::vector<double> series = interference_power_series(
        compose_received(sc).interference, PowerScale::Db);
    for (auto _ : state) {
        benchmark::DoNotOptimize(decompose(series));
    }
}
BENCHMARK(BM_EmdDecompose)->Arg(200)->Arg(500);

void BM_BlockError(benchmark::State& state) {
    double acc = 0.0;
    for (auto _ : state) {
        for (int r = 1; r <= 64; ++r) acc += fbl::block_error(100.0, 50, r);
    }
    benchmark::DoNotOptimize(acc);
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_BlockError);

void BM_MinBlocklength(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(fbl::min_blocklength(100.0, 50, 1e-5));
    }
}
BENCHMARK(BM_MinBlocklength);

void BM_TransformerStep(benchmark::State& state) {
    TransformerConfig cfg;
    cfg.dropout = 0.0;
    TransformerModel model(cfg, 3);
    Rng rng(5);
    Eigen::MatrixXd x(16, cfg.window);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x(i / cfg.window, i % cfg.window) = rng.next_gaussian();
    }
    Eigen::VectorXd y(16);
    for (Eigen::Index i = 0; i < 16; ++i) y(i) = rng.next_gaussian();
    for (auto _ : state) {
        for (auto* p : model.parameters()) p->zero_grad();
        benchmark::DoNotOptimize(model.loss_and_grad(x, y, true, &rng));
    }
}
BENCHMARK(BM_TransformerStep);

void BM_LstmStep(benchmark::State& state) {
    LstmConfig cfg;
    LstmModel model(cfg, 3);
    Rng rng(5);
    Eigen::MatrixXd x(16, cfg.window);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x(i / cfg.window, i % cfg.window) = rng.next_gaussian();
    }
    Eigen::VectorXd y(16);
    for (Eigen::Index i = 0; i < 16; ++i) y(i) = rng.next_gaussian();
    for (auto _ : state) {
        for (auto* p : model.parameters()) p->zero_grad();
        benchmark::DoNotOptimize(model.loss_and_grad(x, y));
    }
}
BENCHMARK(BM_LstmStep);

} // namespace

BENCHMARK_MAIN();
