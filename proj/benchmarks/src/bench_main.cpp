#include "amfem/adapt.hpp"
#include "amfem/estimator.hpp"
#include "amfem/system.hpp"

#include <benchmark/benchmark.h>

using namespace amfem;

namespace {

ElementFamily family(std::int64_t id) {
    switch (id) {
        case 0: return {Family::RaviartThomas, 0};
        case 1: return {Family::BrezziDouglasMarini, 0};
        default: return {Family::RaviartThomas, 1};
    }
}

ProblemKind kind(std::int64_t id) { return id == 0 ? ProblemKind::Poisson : ProblemKind::Stokes; }

void BM_Refine(benchmark::State& state) {
    const Mesh m = refine_uniform(generate_lshape(2), static_cast<int>(state.range(0)));
    MarkSet marked;
    for (int t = 0; t < static_cast<int>(m.num_triangles()); t += 7) marked.push_back(t);
    for (auto _ : state) benchmark::DoNotOptimize(refine_with_parents(m, marked));
    state.counters["triangles"] = static_cast<double>(m.num_triangles());
}
BENCHMARK(BM_Refine)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Assemble(benchmark::State& state) {
    const Mesh m = refine_uniform(generate_unit_square(4), static_cast<int>(state.range(0)));
    const ProblemSpec p = constant_source(kind(state.range(2)), family(state.range(1)));
    const DofMap dofs(m, p.element, p.kind);
    for (auto _ : state) benchmark::DoNotOptimize(assemble(m, dofs, p));
    state.counters["dofs"] = static_cast<double>(dofs.n_total());
}
BENCHMARK(BM_Assemble)->ArgsProduct({{2, 4, 6}, {0, 1, 2}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state) {
    const Mesh m = refine_uniform(generate_unit_square(4), static_cast<int>(state.range(0)));
    const ProblemSpec p = constant_source(kind(state.range(2)), family(state.range(1)));
    const DofMap dofs(m, p.element, p.kind);
    const SaddleSystem sys = assemble(m, dofs, p);
    for (auto _ : state) benchmark::DoNotOptimize(solve(sys));
    state.counters["dofs"] = static_cast<double>(dofs.n_total());
}
BENCHMARK(BM_Solve)->ArgsProduct({{2, 4, 6}, {0, 2}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Estimate(benchmark::State& state) {
    const Mesh m = refine_uniform(generate_lshape(2), static_cast<int>(state.range(0)));
    const ProblemSpec p = constant_source(ProblemKind::Stokes, family(state.range(1)));
    const Solution sol = solve_problem(m, p);
    for (auto _ : state) benchmark::DoNotOptimize(indicators(m, sol.dofs, sol.field.sigma, p.source));
    state.counters["triangles"] = static_cast<double>(m.num_triangles());
}
BENCHMARK(BM_Estimate)->ArgsProduct({{2, 4, 6}, {0, 1, 2}})->Unit(benchmark::kMillisecond);

void BM_AfemLoop(benchmark::State& state) {
    AfemConfig c;
    c.problem = constant_source(ProblemKind::Poisson, family(state.range(1)));
    c.initial_mesh = generate_lshape(1);
    c.max_dofs = state.range(0);
    c.error_mode = ErrorMode::None;
    for (auto _ : state) benchmark::DoNotOptimize(afem_run(c));
}
BENCHMARK(BM_AfemLoop)->ArgsProduct({{5000, 20000}, {0, 2}})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
