// Serial-vs-parallel timings for the two OpenMP drivers: variant generation
// over a corpus and prediction runs over variant inputs. Both modes produce
// identical outputs (asserted in the unit suites); these benchmarks report
// what the parallel schedule buys on the current machine.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <string>
#include <vector>

#include "lacuna/corpus.hpp"
#include "lacuna/masking.hpp"
#include "lacuna/ngram.hpp"
#include "lacuna/runner.hpp"

using namespace lacuna;

namespace {

Corpus synthetic_corpus(std::size_t n_docs) {
    const std::vector<std::string> lexicon = {"ina", "szarru", "e2",   "mat",  "ki",
                                              "dumu", "lugal",  "gal", "nindas", "ur"};
    Corpus corpus;
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    for (std::size_t d = 0; d < n_docs; ++d) {
        Document doc;
        doc.doc_id = "B" + std::to_string(d);
        doc.language = "Akkadian";
        doc.line_starts = {0};
        const std::size_t n_words = 20 + d % 41;
        for (std::size_t i = 0; i < n_words; ++i) {
            state = state * 6364136223846793005ULL + 1442695040888963407ULL;
            doc.words.push_back(lexicon[(state >> 33) % lexicon.size()]);
        }
        corpus.push_back(std::move(doc));
    }
    return corpus;
}

const Corpus& bench_corpus() {
    static const Corpus corpus = synthetic_corpus(200);
    return corpus;
}

const NgramBackend& bench_backend() {
    static const NgramBackend backend = [] {
        NgramConfig cfg;
        cfg.order = 3;
        return NgramBackend(NgramModel::train(bench_corpus(), cfg));
    }();
    return backend;
}

const std::vector<VariantInput>& bench_inputs() {
    static const std::vector<VariantInput> inputs = [] {
        MaskingConfig cfg;
        cfg.seed = 17;
        cfg.max_variants = 3;
        const auto variants = mask_corpus(bench_corpus(), cfg, ExecutionMode::Serial);
        return build_variant_inputs(bench_corpus(), variants, cfg.mask_placeholder);
    }();
    return inputs;
}

void BM_MaskCorpus(benchmark::State& state, ExecutionMode mode) {
    MaskingConfig cfg;
    cfg.seed = 17;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mask_corpus(bench_corpus(), cfg, mode));
    }
}

void BM_Predictions(benchmark::State& state, Method method, ExecutionMode mode) {
    NgramBackend backend = bench_backend();  // local copy: generate() is non-const
    RunOptions opts;
    opts.method = method;
    opts.system_id = "ngram";
    opts.mode = mode;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_predictions(bench_inputs(), &backend, &backend, opts));
    }
}

}  // namespace

BENCHMARK_CAPTURE(BM_MaskCorpus, serial, ExecutionMode::Serial);
BENCHMARK_CAPTURE(BM_MaskCorpus, parallel, ExecutionMode::Parallel);
BENCHMARK_CAPTURE(BM_Predictions, restore_serial, Method::Restore, ExecutionMode::Serial);
BENCHMARK_CAPTURE(BM_Predictions, restore_parallel, Method::Restore, ExecutionMode::Parallel);
BENCHMARK_CAPTURE(BM_Predictions, all_serial, Method::All, ExecutionMode::Serial);
BENCHMARK_CAPTURE(BM_Predictions, all_parallel, Method::All, ExecutionMode::Parallel);

BENCHMARK_MAIN();
