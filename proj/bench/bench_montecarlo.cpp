// Serial reference vs the OpenMP Monte Carlo loop on a synthetic workload.
#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "swarm/examination.hpp"
#include "swarm/querylog.hpp"
#include "swarm/simulation.hpp"

namespace {

struct Workload {
    swarm::PheromoneStore store{swarm::Flavor::naive, swarm::DecayConfig{}};
    std::vector<swarm::Session> test;
    swarm::RunConfig cfg;
};

const Workload& workload() {
    static const Workload w = [] {
        Workload w;
        const auto table = swarm::ExaminationTable::single_browsing_approximation();
        std::vector<swarm::DocRef> page;
        for (int r = 1; r <= 10; ++r) page.emplace_back("http://bench.example/" + std::to_string(r));
        swarm::SyntheticClickModel model;
        auto sessions = swarm::sessionize(swarm::gen_synthetic_log(4000, page, 6, table, 3, model));
        w.cfg.k = 3;
        w.cfg.iterations = 20;
        w.cfg.split = model.start + 2000 * model.spacing;
        auto [train_set, test_set] = swarm::partition(sessions, w.cfg.split);
        swarm::train(w.store, train_set, table, w.cfg.key_mode);
        w.test = std::move(test_set);
        return w;
    }();
    return w;
}

void BM_MonteCarloSerial(benchmark::State& state) {
    const auto& w = workload();
    for (auto _ : state) benchmark::DoNotOptimize(swarm::run_monte_carlo_serial(w.store, w.test, w.cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(w.test.size()));
}

void BM_MonteCarloParallel(benchmark::State& state) {
    const auto& w = workload();
    for (auto _ : state) benchmark::DoNotOptimize(swarm::run_monte_carlo(w.store, w.test, w.cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(w.test.size()));
}

}  // namespace

BENCHMARK(BM_MonteCarloSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
