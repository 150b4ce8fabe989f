#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <cmath>

#include "quadhps/hps.hpp"
#include "quadhps/problems.hpp"

using namespace quadhps;

namespace {

LeafDiscretization unit_leaf(int s, double lambda = 0.0) {
    return {PatchGrid({0.0, 0.0, 1.0, 1.0}, s), lambda};
}

void BM_leaf_solve(benchmark::State& state) {
    const int s = static_cast<int>(state.range(0));
    const auto d = unit_leaf(s);
    const SineTransform st(s);
    BoundaryVector g(s, TraceRole::Dirichlet);
    for (int k = 0; k < 4 * s; ++k) g.data()[k] = std::sin(0.3 * k);
    Eigen::MatrixXd F = Eigen::MatrixXd::Random(s, s);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_leaf(d, st, &g, &F));
    }
}

void BM_dtn_full(benchmark::State& state) {
    const int s = static_cast<int>(state.range(0));
    const auto d = unit_leaf(s, 0.01);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_dtn_leaf(d));
    }
}

void BM_dtn_fast(benchmark::State& state) {
    const int s = static_cast<int>(state.range(0));
    const auto d = unit_leaf(s, 0.01);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_dtn_leaf_fast(d));
    }
}

void BM_merge(benchmark::State& state) {
    const int s = static_cast<int>(state.range(0));
    const Eigen::MatrixXd T = build_dtn_leaf(unit_leaf(s));
    for (auto _ : state) {
        benchmark::DoNotOptimize(merge_4to1(T, T, T, T, false));
    }
}

void BM_trace_interpolation(benchmark::State& state) {
    const int s = static_cast<int>(state.range(0));
    BoundaryVector v(s, TraceRole::Dirichlet);
    for (int k = 0; k < 4 * s; ++k) v.data()[k] = std::cos(0.1 * k);
    for (auto _ : state) {
        benchmark::DoNotOptimize(prolong_boundary(v));
        benchmark::DoNotOptimize(restrict_boundary(v));
    }
}

void BM_uniform_solve(benchmark::State& state) {
    const int level = static_cast<int>(state.range(0));
    const ProblemSpec p = make_poisson1();
    for (auto _ : state) {
        auto tree = HpsTree::build(p.domain, 16, level, [](const PatchGrid&) { return true; });
        HpsSolver solver(tree, p.lambda);
        solver.build(p.f);
        solver.solve(p.u_exact);
        benchmark::DoNotOptimize(tree.root().data.T);
    }
}

} // namespace

BENCHMARK(BM_leaf_solve)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(BM_dtn_full)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(BM_dtn_fast)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(BM_merge)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(BM_trace_interpolation)->Arg(16)->Arg(64);
BENCHMARK(BM_uniform_solve)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
