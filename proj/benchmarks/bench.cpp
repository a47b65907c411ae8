#include <benchmark/benchmark.h>

#include <netaccess/network.hpp>
#include <netaccess/risk.hpp>
#include <netaccess/robust.hpp>
#include <netaccess/scenarios.hpp>

#include <random>

using namespace netaccess;

namespace {

RadialNetwork chain_network(int buses) {
    RadialNetwork net;
    net.bus_count = buses;
    for (int i = 1; i < buses; ++i) net.edges.emplace_back(i, i - 1);
    const auto e = static_cast<Eigen::Index>(net.edges.size());
    net.resistance = Vec::Constant(e, 0.01);
    net.reactance = Vec::Constant(e, 0.02);
    net.flow_limit = Vec::Constant(e, 5.0);
    return net;
}

RobustAuctionInstance small_instance(int buses) {
    RobustAuctionInstance inst;
    inst.sensitivity = build_sensitivity(chain_network(buses), true);
    DeraBid bid;
    bid.dera_id = "bench";
    for (int i = 1; i < buses; ++i) bid.active_buses.push_back(i);
    const auto dim = static_cast<Eigen::Index>(bid.active_buses.size());
    for (Eigen::Index a = 0; a < dim; ++a) {
        ConcaveCurve cv;
        cv.curve = QuadraticCurve{-1.0, 3.0, 0.0};
        bid.injection_curves.push_back(cv);
        bid.withdrawal_curves.push_back(cv);
    }
    bid.c_min_injection = Vec::Zero(dim);
    bid.c_min_withdrawal = Vec::Zero(dim);
    inst.bids = {bid};
    inst.dso_cost = DsoCost::uniform(buses, QuadraticCurve{0.1, 0.5, 0.0});
    inst.p0_lower = Vec::Constant(buses, 0.1);
    inst.p0_upper = Vec::Constant(buses, 0.1);
    inst.p_max_injection = Vec::Constant(buses, 2.0);
    inst.p_max_withdrawal = Vec::Constant(buses, 2.0);
    return inst;
}

void bm_graph_matrices(benchmark::State& state) {
    RadialNetwork net = chain_network(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(build_graph_matrices(net));
}
BENCHMARK(bm_graph_matrices)->Arg(5)->Arg(50)->Arg(141);

void bm_sensitivity(benchmark::State& state) {
    RadialNetwork net = chain_network(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(build_sensitivity(net, true));
}
BENCHMARK(bm_sensitivity)->Arg(50)->Arg(141);

void bm_worst_case_range(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vec a(d), lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        a(i) = unif(rng);
        lo(i) = -std::abs(unif(rng));
        hi(i) = std::abs(unif(rng));
    }
    for (auto _ : state) benchmark::DoNotOptimize(worst_case_range(a, lo, hi));
}
BENCHMARK(bm_worst_case_range)->Arg(10)->Arg(141);

void bm_cvar(benchmark::State& state) {
    ScenarioSpec spec;
    spec.buses = {BusDistribution{0.0, 1.0, -3.0, 3.0}};
    ScenarioSet set = sample_truncated_normal(spec, static_cast<int>(state.range(0)), 3);
    EmpiricalDistribution dist;
    dist.samples = set.scenarios.col(0);
    for (auto _ : state) benchmark::DoNotOptimize(cvar(dist, 0.9));
}
BENCHMARK(bm_cvar)->Arg(2000)->Arg(100000);

void bm_clear_robust(benchmark::State& state) {
    RobustAuctionInstance inst = small_instance(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(clear_robust(inst));
}
BENCHMARK(bm_clear_robust)->Arg(4)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
