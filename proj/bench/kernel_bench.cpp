// Parallel kernels against their serial references on a 2-state, 2-player
// family.

#include <benchmark/benchmark.h>

#include "pomg/envs.hpp"
#include "pomg/kernels.hpp"

namespace {

using namespace pomg;

struct Fixture {
    CandidateFamily family;
    PureStrategySets sets;
    Dataset data;

    Fixture() {
        PomgSpec spec{2, 2, 2, {2, 2}, {2, 2}};
        const auto truth = random_revealing_pomg(spec, 0.05, 7);
        family = candidate_family_around(truth, 32, 0.5, 11);
        sets = PureStrategySets::enumerate(spec, PolicyClass::Reactive);
        Rng rng(3);
        const ActionRule uniform = [&](const PlayerHistory& h, Rng& r) {
            return static_cast<int>(uniform01(r) * spec.actions[h.player]);
        };
        for (int t = 0; t < 2000; ++t) data.push_back({"uniform", sample_trajectory(truth, uniform, rng)});
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_LogLikelihoodsParallel(benchmark::State& state) {
    const auto& f = fixture();
    kernels::set_threads(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::log_likelihoods(f.family.models, f.data));
    kernels::set_threads(0);
}
BENCHMARK(BM_LogLikelihoodsParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

void BM_LogLikelihoodsSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::log_likelihoods(f.family.models, f.data));
}
BENCHMARK(BM_LogLikelihoodsSerial);

void BM_ValueTensorsParallel(benchmark::State& state) {
    const auto& f = fixture();
    kernels::set_threads(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::value_tensors(f.family.models, f.sets));
    kernels::set_threads(0);
}
BENCHMARK(BM_ValueTensorsParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

void BM_ValueTensorsSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::value_tensors(f.family.models, f.sets));
}
BENCHMARK(BM_ValueTensorsSerial);

}  // namespace

BENCHMARK_MAIN();
