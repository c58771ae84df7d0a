#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lacuna/corpus.hpp"

namespace lacuna {

struct MaskingConfig {
    double mask_rate = 0.15;
    std::size_t max_variants = 15;
    std::uint64_t seed = 0;
    std::string mask_placeholder = "[MASK]";
    std::string unk_placeholder = "[UNK]";
};

// One masking of one document. Positions are strictly increasing global
// word indices; gold holds the original surfaces at those positions.
struct MaskedVariant {
    std::string doc_id;
    std::uint32_t variant_id = 0;
    std::vector<std::size_t> positions;
    std::vector<std::string> gold;
    std::string language;
};

/// max(1, round-half-up(mask_rate * n_words)), clamped to n_words.
std::size_t mask_count(std::size_t n_words, double mask_rate);

// Exact C(n, k), saturating at cap.
std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap);

// min(max_variants, C(n, k)) variants with pairwise-distinct position sets.
// Full lexicographic enumeration when C(n, k) fits under the cap, seeded
// rejection sampling otherwise. Deterministic for fixed (doc, cfg).
std::vector<MaskedVariant> generate_variants(const Document& doc, const MaskingConfig& cfg);

// Word sequence with the given positions replaced by placeholder.
std::vector<std::string> masked_words(const std::vector<std::string>& words,
                                      const std::vector<std::size_t>& positions,
                                      const std::string& placeholder);

/// Space-joined masked text; throws on an out-of-range position.
std::string render_masked(const Document& doc, const std::vector<std::size_t>& positions,
                          const std::string& placeholder);

std::string join_words(const std::vector<std::string>& words);

// Substitutes gold back into the masked word sequence.
std::vector<std::string> unmask_words(std::vector<std::string> masked,
                                      const std::vector<std::size_t>& positions,
                                      const std::vector<std::string>& gold);

}  // namespace lacuna
