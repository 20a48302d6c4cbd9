// Serial reference vs OpenMP path for the kernels that have both.
// Argument 0 runs the serial path, 1 the parallel one.

#include <benchmark/benchmark.h>

#include <cmath>

#include "talkface/audiofeat.hpp"
#include "talkface/corpus.hpp"
#include "talkface/metrics.hpp"
#include "talkface/parallel.hpp"
#include "talkface/training.hpp"

using namespace talkface;

namespace {

Execution mode(const benchmark::State& state)
{
    return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

const corpus::Corpus& bench_corpus()
{
    static const corpus::Corpus c = [] {
        corpus::GeneratorConfig g;
        g.sequences_per_emotion = 1;
        g.length = 60;
        g.seed = 17;
        return corpus::generate_synthetic(corpus::default_profiles(), g);
    }();
    return c;
}

void BM_Mfcc(benchmark::State& state)
{
    audio::Waveform w;
    w.samples.resize(10 * audio::kSampleRate);
    for (std::size_t i = 0; i < w.samples.size(); ++i)
        w.samples[i] = 0.3 * std::sin(0.05 * static_cast<double>(i)) + 0.1 * std::sin(0.31 * static_cast<double>(i));
    for (auto _ : state)
        benchmark::DoNotOptimize(audio::mfcc_sequence(w, {}, mode(state)));
    state.SetItemsProcessed(state.iterations() * 300);
}
BENCHMARK(BM_Mfcc)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Stage1Epoch(benchmark::State& state)
{
    const auto& c = bench_corpus();
    const auto samples = model::make_samples(c, c.sequences);
    model::Stage1Model m{model::ModelConfig{}};
    m.stats() = model::FeatureStats::fit(c.sequences);
    m.initialize(model::mean_landmarks(samples), model::mean_pose(samples));
    model::TrainConfig tc;
    tc.epochs = 1;
    tc.execution = mode(state);
    nn::Adam opt(m.params(), tc.adam);
    for (auto _ : state)
        model::train_stage1(m, opt, samples, tc, 0, [](const model::Stage1Loss&) {});
    state.SetItemsProcessed(state.iterations() * static_cast<long>(samples.size()));
}
BENCHMARK(BM_Stage1Epoch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state)
{
    const auto& c = bench_corpus();
    std::vector<model::Bundle> bundles;
    for (const auto& s : c.sequences)
        bundles.push_back(model::bundle_from_sequence(s, geometry::kDefaultScaleFactor));
    std::vector<metrics::BundlePair> pairs;
    for (std::size_t i = 0; i < bundles.size(); ++i)
        pairs.push_back({"pair" + std::to_string(i), &bundles[i], &bundles[(i + 1) % bundles.size()]});
    for (auto _ : state)
        benchmark::DoNotOptimize(metrics::evaluate(pairs, mode(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(pairs.size()));
}
BENCHMARK(BM_Evaluate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
