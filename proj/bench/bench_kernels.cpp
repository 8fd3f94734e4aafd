#include <benchmark/benchmark.h>

#include <numeric>

#include "relief/harness.hpp"
#include "relief/learning/mlp.hpp"

using namespace relief;

namespace {

struct Batch {
    ReluNetwork net;
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<int> rows;
};

Batch make_batch(int n, int inputs) {
    MlpVFA vfa(inputs, {16, 16}, 1);
    Batch b{vfa.network(), Eigen::MatrixXd::Random(n, inputs), Eigen::VectorXd::Random(n), std::vector<int>(static_cast<std::size_t>(n))};
    std::iota(b.rows.begin(), b.rows.end(), 0);
    return b;
}

void BM_GradientSerial(benchmark::State& state) {
    const auto b = make_batch(static_cast<int>(state.range(0)), 11);
    for (auto _ : state) benchmark::DoNotOptimize(mse_gradient_serial(b.net, b.x, b.y, b.rows));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GradientParallel(benchmark::State& state) {
    const auto b = make_batch(static_cast<int>(state.range(0)), 11);
    for (auto _ : state) benchmark::DoNotOptimize(mse_gradient_parallel(b.net, b.x, b.y, b.rows));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

std::vector<std::uint64_t> seeds(int n) {
    std::vector<std::uint64_t> s;
    for (int i = 0; i < n; ++i) s.push_back(evaluation_path_seed(1, i));
    return s;
}

void BM_PathsSerial(benchmark::State& state) {
    const auto spec = builtin_instance("nepal");
    RuleBasedPolicy rule(spec);
    WarmupPolicy warm(spec);
    const auto s = seeds(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(benchmark_serial({&rule, &warm}, spec, s));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}

void BM_PathsParallel(benchmark::State& state) {
    const auto spec = builtin_instance("nepal");
    RuleBasedPolicy rule(spec);
    WarmupPolicy warm(spec);
    const auto s = seeds(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(relief::benchmark({&rule, &warm}, spec, s));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}

}  // namespace

BENCHMARK(BM_GradientSerial)->Arg(256)->Arg(4096);
BENCHMARK(BM_GradientParallel)->Arg(256)->Arg(4096);
BENCHMARK(BM_PathsSerial)->Arg(64);
BENCHMARK(BM_PathsParallel)->Arg(64);

BENCHMARK_MAIN();
