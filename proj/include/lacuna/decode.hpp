#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "lacuna/backend.hpp"
#include "lacuna/masking.hpp"
#include "lacuna/prompts.hpp"

namespace lacuna {

struct PredictionRecord {
    std::string system_id;
    Method method = Method::All;
    std::string doc_id;
    std::uint32_t variant_id = 0;
    std::size_t position = 0;
    std::string predicted;  // empty when unparseable or failed
};

// A variant paired with its masked word sequence (placeholder at each
// masked position, original words elsewhere).
struct VariantInput {
    MaskedVariant variant;
    std::vector<std::string> words;
};

VariantInput make_variant_input(const Document& doc, const MaskedVariant& variant,
                                const std::string& mask_placeholder);
// Reconstructs the word sequence from audit text; validates that each masked
// position holds the placeholder.
VariantInput variant_input_from_text(const MaskedVariant& variant, const std::string& masked_text,
                                     const std::string& mask_placeholder);

// Total over arbitrary model output: locates the last "WORDS:" marker
// (case-insensitive), splits on commas, takes the first whitespace token of
// each item, and pads/truncates to exactly expected_k entries.
std::vector<std::string> parse_all_output(const std::string& text, std::size_t expected_k);

// First whitespace-delimited token with wrapper punctuation stripped from
// both ends. Brackets and braces are kept: they occur inside transliterated
// surfaces and placeholders.
std::string first_token_normalized(const std::string& reply);

struct MethodResult {
    std::vector<PredictionRecord> records;
    std::size_t failures = 0;  // failed backend calls
};

MethodResult predict_all(TextBackend& backend, const VariantInput& input,
                         const SamplingParams& params, const std::string& system_id);

// One call per masked position; a failure yields an empty prediction for
// that position only. Calls never see each other's outputs.
MethodResult predict_one_by_one(TextBackend& backend, const VariantInput& input,
                                const SamplingParams& params, const std::string& system_id,
                                const Placeholders& ph);

struct ForceDecodeResult {
    std::string word;
    std::vector<std::uint32_t> ids;
};

// One complete word by greedy subword decoding: the first step is restricted
// to word-initial subwords (minus banned ids), later steps are unrestricted
// and stop at the next word-initial subword or end-of-text, which is
// discarded. A 64-subword cap guarantees termination.
ForceDecodeResult force_decode_word(const ScoredBackend& backend,
                                    std::span<const std::uint32_t> context,
                                    const std::unordered_set<std::uint32_t>& banned);

// Walks the document left to right, force-feeding known words and decoding
// one word per masked position; the decoded word joins the context before
// the walk continues.
MethodResult predict_restore(const ScoredBackend& backend, const VariantInput& input,
                             const SamplingParams& params, const std::string& system_id,
                             bool ban_mask_token = true);

void sort_canonical(std::vector<PredictionRecord>& records);

}  // namespace lacuna
