#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lacuna/backend.hpp"
#include "lacuna/corpus.hpp"
#include "lacuna/decode.hpp"
#include "lacuna/masking.hpp"

// Drivers for the per-document and per-variant loops. Each driver exists in
// a serial reference form and an OpenMP form; both write results into
// per-item slots keyed by input index, so outputs are identical regardless
// of thread schedule.

namespace lacuna {

enum class ExecutionMode { Serial, Parallel };

ExecutionMode execution_mode_from_name(const std::string& name);
std::string execution_mode_name(ExecutionMode mode);

// Variant generation for every document, in corpus order.
std::vector<MaskedVariant> mask_corpus(const Corpus& corpus, const MaskingConfig& cfg,
                                       ExecutionMode mode = ExecutionMode::Parallel);

// Pairs each variant with its masked word sequence; the variant's doc_id
// must exist in the corpus.
std::vector<VariantInput> build_variant_inputs(const Corpus& corpus,
                                               const std::vector<MaskedVariant>& variants,
                                               const std::string& mask_placeholder);

struct RunOptions {
    Method method = Method::All;
    SamplingParams params;  // params.seed is the base; variants get mixed sub-seeds
    std::string system_id;
    Placeholders placeholders;
    bool ban_mask_token = true;
    ExecutionMode mode = ExecutionMode::Parallel;
};

struct RunResult {
    std::vector<PredictionRecord> records;  // canonically sorted
    std::size_t failures = 0;               // failed backend calls across all variants
};

// Runs one method over every variant. All / One-by-one need `text`; Restore
// needs `scored`; passing nullptr for the needed capability is a ConfigError.
// Per-variant seeds derive from params.seed and the variant key, so results
// do not depend on execution order.
RunResult run_predictions(const std::vector<VariantInput>& inputs, TextBackend* text,
                          const ScoredBackend* scored, const RunOptions& opts);

}  // namespace lacuna
