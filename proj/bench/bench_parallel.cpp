// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include <string>

#include "cmte/mc_oracle.hpp"
#include "cmte/scenario.hpp"
#include "cmte/stochastic_bpr.hpp"

using namespace cmte;

namespace {

Link sample_link() {
    Link l;
    l.id = "1";
    l.tail = 1;
    l.head = 2;
    l.t0 = 10;
    l.cap_design = 1000;
    l.theta = 0.8;
    return l;
}

Network chain(int n) {
    std::string text = "[links]\n";
    for (int i = 1; i <= n; ++i)
        text += std::to_string(i) + " " + std::to_string(i) + " " + std::to_string(i + 1) + " 5 " +
                std::to_string(800 + i % 400) + " 0.7\n";
    text += "[od]\n1 " + std::to_string(n + 1) + " 900\n";
    return load_network(text);
}

template <bool Parallel>
void BM_LinkSampling(benchmark::State& st) {
    const McConfig cfg{static_cast<std::size_t>(st.range(0)), 1, 3.0};
    for (auto _ : st) {
        auto e = Parallel ? mc_link_moments(sample_link(), 1000, BprParams{}, cfg)
                          : serial::mc_link_moments(sample_link(), 1000, BprParams{}, cfg);
        benchmark::DoNotOptimize(e);
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_TailSampling(benchmark::State& st) {
    const McConfig cfg{static_cast<std::size_t>(st.range(0)), 1, 3.0};
    for (auto _ : st) {
        auto e = Parallel ? mc_tail_means(20, 3, 0.9, cfg) : serial::mc_tail_means(20, 3, 0.9, cfg);
        benchmark::DoNotOptimize(e);
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_LinkMoments(benchmark::State& st) {
    const Network net = chain(static_cast<int>(st.range(0)));
    const std::vector<double> v(net.num_links(), 900.0);
    for (auto _ : st) {
        auto m = Parallel ? link_moments(net, v, BprParams{}) : serial::link_moments(net, v, BprParams{});
        benchmark::DoNotOptimize(m);
    }
}

template <bool Parallel>
void BM_Sweep(benchmark::State& st) {
    const Network net = standin_network();
    const Scenario sc = preset_scenario("scenario2");
    for (auto _ : st) {
        auto r = Parallel ? run_scenario(net, sc) : serial::run_scenario(net, sc);
        benchmark::DoNotOptimize(r);
    }
}

}  // namespace

BENCHMARK(BM_LinkSampling<false>)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LinkSampling<true>)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TailSampling<false>)->Arg(1 << 22)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TailSampling<true>)->Arg(1 << 22)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LinkMoments<false>)->Arg(4096)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LinkMoments<true>)->Arg(4096)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Sweep<false>)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK(BM_Sweep<true>)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
