#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lacuna/corpus.hpp"
#include "lacuna/decode.hpp"
#include "lacuna/ensemble.hpp"
#include "lacuna/masking.hpp"

namespace lacuna {

struct FrequencyEntry {
    std::string word;
    std::uint64_t count = 0;
    double frequency = 0.0;  // count / total
};

struct FrequencyTable {
    std::vector<FrequencyEntry> top;  // descending frequency, ties lexicographic
    std::size_t unique = 0;
    std::uint64_t total = 0;
};

// Relative frequencies of the top_n most common words plus the total unique
// count. Empty input yields an empty table.
FrequencyTable frequency_report(const std::vector<std::string>& words, std::size_t top_n = 20);

struct EvalBreakdown {
    std::size_t n_positions = 0;
    std::size_t n_correct = 0;
    double accuracy = 0.0;
    FrequencyTable predicted;  // over non-empty predictions
    FrequencyTable reference;  // over gold words
};

struct EvalReport {
    EvalBreakdown overall;
    std::map<std::string, EvalBreakdown> per_language;
    std::optional<double> topk_accuracy;
    std::optional<std::size_t> topk_k;
};

// Exact-match scoring of one prediction run against the gold variants.
// Every masked position counts; positions without a prediction (or with an
// empty one) count wrong. A prediction whose key is not a gold masked
// position, or a second prediction for the same key, is an error.
EvalReport score_accuracy(const std::vector<PredictionRecord>& predictions,
                          const std::vector<MaskedVariant>& gold, std::size_t top_n = 20);

// Fraction of masked positions whose gold word appears among the first k
// ranked words. Keys absent from `ranked` count wrong; unknown keys error.
double topk_accuracy(const std::vector<RankedPrediction>& ranked,
                     const std::vector<MaskedVariant>& gold, std::size_t k);

// Per-language most common training word, ties broken lexicographically.
std::map<std::string, std::string> most_common_words(const Corpus& train);

// Predicts the language's most common training word at every masked
// position; errors if a variant's language is absent from training.
std::vector<PredictionRecord> baseline_predictions(const Corpus& train,
                                                   const std::vector<MaskedVariant>& variants);

EvalReport most_common_word_baseline(const Corpus& train,
                                     const std::vector<MaskedVariant>& variants,
                                     std::size_t top_n = 20);

// One cell of the human-readable results grid.
struct ResultCell {
    std::string system_id;
    Method method = Method::All;
    double accuracy = 0.0;
};

// Fixed-width text table: one row per method, one column per system, plus
// spanning rows for the ensemble (top-1 with optional top-k in parentheses)
// and the most-common-word baseline when present.
std::string render_results_table(const std::vector<ResultCell>& cells,
                                 std::optional<double> ensemble_top1 = std::nullopt,
                                 std::optional<double> ensemble_topk = std::nullopt,
                                 std::optional<double> baseline = std::nullopt);

std::string render_frequency_csv(const FrequencyTable& table);

}  // namespace lacuna
