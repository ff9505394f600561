#include "srkweak/conditions.hpp"
#include "srkweak/expansion.hpp"
#include "srkweak/simulate.hpp"

#include <benchmark/benchmark.h>

using namespace srkw;

static void BM_EnumerateDelta(benchmark::State& state) {
    const int halves = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_ts_delta(halves));
}
BENCHMARK(BM_EnumerateDelta)->Arg(5)->Arg(6)->Arg(7)->Unit(benchmark::kMillisecond);

static void BM_GenerateConditions(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(generate_conditions(Calculus::ito, 2, m));
}
BENCHMARK(BM_GenerateConditions)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_VerifyRi1wm(benchmark::State& state) {
    const auto tab = ri1wm();
    const int m = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(verify_tableau(tab, Calculus::ito, 2, m));
}
BENCHMARK(BM_VerifyRi1wm)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_PhiS(benchmark::State& state) {
    const ConcreteScheme sc(ri1wm(), 2);
    const auto t = canonicalize_concrete(parse_node("(s_1,s_2,{s_2}_1)"));
    for (auto _ : state) benchmark::DoNotOptimize(sc.model().expect(phi_s(t, sc)));
}
BENCHMARK(BM_PhiS);

static void BM_StepperStep(benchmark::State& state) {
    const SrkStepper st(ri1wm(), builtin_problem(state.range(0) == 1 ? "gbm" : "linear2d"));
    std::mt19937_64 rng(1);
    std::vector<double> theta(st.theta_count());
    std::vector<double> y = st.problem().x0;
    for (auto _ : state) {
        st.sample(0.125, rng, theta.data());
        st.step(0.0, 0.125, theta.data(), y.data());
        if (std::abs(y[0]) > 1e6) y = st.problem().x0;
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StepperStep)->Arg(1)->Arg(2);

static void BM_TruncatedExpectation(benchmark::State& state) {
    const auto sde = *builtin_problem("linear2d").linear;
    const auto oracle = linear_oracle(sde, make_functional("norm2", 2));
    for (auto _ : state) benchmark::DoNotOptimize(truncated_expectation(oracle, sde.x0, 0.1, 2, Calculus::ito));
}
BENCHMARK(BM_TruncatedExpectation)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
