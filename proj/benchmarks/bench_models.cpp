#include <benchmark/benchmark.h>

#include <vector>

#include "redq/exact_small.hpp"
#include "redq/meanfield.hpp"
#include "redq/pair_ps.hpp"
#include "redq/positional.hpp"
#include "redq/simulator.hpp"
#include "redq/triplet_ps.hpp"

using namespace redq;

namespace {

// Start the rhs benchmarks from a partly relaxed state so no class is empty.
State warm_state(const OdeSystem& sys, double t) {
    return euler_integrate(sys, State(sys.dim, 0.0), {}, t);
}

void run_rhs(benchmark::State& st, const OdeSystem& sys, double warm_t) {
    const auto s = warm_state(sys, warm_t);
    State out(sys.dim);
    for (auto _ : st) {
        sys.rhs(s, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.counters["dim"] = static_cast<double>(sys.dim);
}

void BM_MeanFieldRhs(benchmark::State& st) {
    ModelParams p;
    p.lambda = 0.9;
    run_rhs(st, meanfield::system(p), 5.0);
}
BENCHMARK(BM_MeanFieldRhs);

void BM_PairPsRhs(benchmark::State& st) {
    ModelParams p;
    p.lambda = 0.9;
    p.xmax = static_cast<int>(st.range(0));
    run_rhs(st, pair_ps::system(p), 5.0);
}
BENCHMARK(BM_PairPsRhs)->Arg(30)->Arg(50);

void BM_PairPsD3Rhs(benchmark::State& st) {
    ModelParams p;
    p.lambda = 0.8;
    p.d = 3;
    p.xmax = 20;
    const auto sys = pair_ps_d::system(p);
    State out(sys.dim);
    const State s(sys.dim, 1e-5);
    for (auto _ : st) {
        sys.rhs(s, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_PairPsD3Rhs);

void BM_TripletRhs(benchmark::State& st) {
    ModelParams p;
    p.lambda = 0.9;
    p.xmax = static_cast<int>(st.range(0));
    run_rhs(st, triplet_ps::system(p), 2.0);
}
BENCHMARK(BM_TripletRhs)->Arg(20)->Arg(30);

void BM_PositionalRhs(benchmark::State& st) {
    ModelParams p;
    p.lambda = 0.9;
    p.discipline = static_cast<Discipline>(st.range(0));
    p.K = 2;
    p.xmax = 40;
    run_rhs(st, positional::system(p), 5.0);
    st.SetLabel(std::string(to_string(p.discipline)));
}
BENCHMARK(BM_PositionalRhs)
    ->Arg(static_cast<int>(Discipline::FCFS))
    ->Arg(static_cast<int>(Discipline::LPS))
    ->Arg(static_cast<int>(Discipline::LCFS));

void BM_Simulation(benchmark::State& st) {
    SimConfig c;
    c.params.lambda = 0.9;
    c.params.discipline = static_cast<Discipline>(st.range(0));
    c.params.K = 2;
    c.n = 1000;
    c.horizon = 200.0;
    std::uint64_t events = 0;
    for (auto _ : st) {
        const auto s = run_simulation(c, 1);
        events += s.events;
        benchmark::DoNotOptimize(s.mean);
    }
    st.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
    st.SetLabel(std::string(to_string(c.params.discipline)));
}
BENCHMARK(BM_Simulation)
    ->Arg(static_cast<int>(Discipline::PS))
    ->Arg(static_cast<int>(Discipline::FCFS))
    ->Arg(static_cast<int>(Discipline::LCFS))
    ->Arg(static_cast<int>(Discipline::LPS))
    ->Unit(benchmark::kMillisecond);

void BM_PsThreeServerChain(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(ps_n3_stationary(0.5, static_cast<int>(st.range(0))).mean());
}
BENCHMARK(BM_PsThreeServerChain)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
