// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "crb/arm_solver.hpp"
#include "crb/demand_response.hpp"
#include "crb/dual_solver.hpp"
#include "crb/index_policy.hpp"
#include "crb/random_instance.hpp"
#include "crb/simulator.hpp"

using namespace crb;

namespace {

struct SweepFixture {
    ArmModel arm;
    ContextChain chain;
    MultiplierVector lambda;
    std::vector<double> in, out;

    explicit SweepFixture(int G, int S)
        : arm(random_arm(G, S, 1.0, 1)),
          chain(random_chain(G, std::vector<int>(static_cast<std::size_t>(G), 1), 2)),
          lambda(std::vector<double>(static_cast<std::size_t>(G), 0.3)),
          in(static_cast<std::size_t>(G) * S, 0.0),
          out(in.size()) {}
};

CrbInstance desk(int n) {
    dr::DrConfig cfg;
    cfg.num_users = n;
    return dr::build_dr_instance(cfg);
}

void BM_BellmanSweepSerial(benchmark::State& state) {
    SweepFixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(bellman_sweep_serial(f.arm, f.chain, f.lambda, 0.95, f.in, f.out));
}

void BM_BellmanSweepOmp(benchmark::State& state) {
    SweepFixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(bellman_sweep_omp(f.arm, f.chain, f.lambda, 0.95, f.in, f.out));
}

void BM_SolveArmsSerial(benchmark::State& state) {
    const auto inst = desk(static_cast<int>(state.range(0)));
    const MultiplierVector lambda(std::vector<double>(6, 2.0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_arms_serial(inst, lambda, {}, {}));
}

void BM_SolveArmsOmp(benchmark::State& state) {
    const auto inst = desk(static_cast<int>(state.range(0)));
    const MultiplierVector lambda(std::vector<double>(6, 2.0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_arms_omp(inst, lambda, {}, {}));
}

struct McFixture {
    CrbInstance inst;
    IndexPolicy policy;

    McFixture() : inst(desk(50)), policy(make_index_policy(inst, solve_dual(inst))) {}
};

void BM_MonteCarloSerial(benchmark::State& state) {
    static const McFixture f;
    for (auto _ : state)
        benchmark::DoNotOptimize(monte_carlo_value_serial(f.inst, f.policy, 300, static_cast<int>(state.range(0)), 1));
}

void BM_MonteCarloOmp(benchmark::State& state) {
    static const McFixture f;
    for (auto _ : state)
        benchmark::DoNotOptimize(monte_carlo_value_omp(f.inst, f.policy, 300, static_cast<int>(state.range(0)), 1));
}

}  // namespace

BENCHMARK(BM_BellmanSweepSerial)->Args({6, 8})->Args({20, 200})->Args({50, 500});
BENCHMARK(BM_BellmanSweepOmp)->Args({6, 8})->Args({20, 200})->Args({50, 500});
BENCHMARK(BM_SolveArmsSerial)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveArmsOmp)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloSerial)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloOmp)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
