#include <benchmark/benchmark.h>

#include "synthweight/encoder.hpp"
#include "synthweight/metrics.hpp"
#include "synthweight/sdi.hpp"
#include "synthweight/toy.hpp"

using namespace synthweight;

namespace {

std::vector<Tokens> toy_tokens(std::size_t count) {
    std::vector<Tokens> out;
    for (const auto& s : toy::make_sentences(count, 1)) out.push_back(tokenize(s));
    return out;
}

void BM_BleuN(benchmark::State& state) {
    const auto sentences = toy_tokens(256);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bleu_n(sentences[i % 256], sentences[(i + 1) % 256], 4));
        ++i;
    }
}
BENCHMARK(BM_BleuN);

void BM_DistinctN(benchmark::State& state) {
    const auto group = toy_tokens(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(distinct_n(group, 3));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DistinctN)->Arg(100)->Arg(1000);

void BM_Zipf(benchmark::State& state) {
    const auto group = toy_tokens(1000);
    for (auto _ : state) benchmark::DoNotOptimize(zipf_coefficient(group));
}
BENCHMARK(BM_Zipf);

void BM_Featurize(benchmark::State& state) {
    const auto sentences = toy_tokens(256);
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(featurize(sentences[i++ % 256], 1 << 18));
}
BENCHMARK(BM_Featurize);

void BM_TrainSdi(benchmark::State& state) {
    const Corpus corpus = toy::make_pairs({static_cast<std::size_t>(state.range(0)), 1});
    const auto data = derive_sdi_dataset(corpus, 1);
    SdiConfig cfg;
    cfg.seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(train_sdi(data, cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_TrainSdi)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_PairBatchGradient(benchmark::State& state) {
    const auto sentences = toy_tokens(64);
    const auto model = make_encoder(4096, 16, 0.1, 1);
    std::vector<TrainingPair> batch;
    for (std::size_t i = 0; i + 1 < sentences.size(); i += 2) batch.push_back({sentences[i], sentences[i + 1], 0.5, 1.0});
    for (auto _ : state) benchmark::DoNotOptimize(pair_batch_gradient(model, batch));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}
BENCHMARK(BM_PairBatchGradient);

}  // namespace

BENCHMARK_MAIN();
