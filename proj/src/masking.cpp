#include "lacuna/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "lacuna/errors.hpp"
#include "lacuna/rng.hpp"

namespace lacuna {

namespace {

// Advances positions to the next k-combination of {0..n-1} in lexicographic
// order; returns false after the last one.
bool next_combination(std::vector<std::size_t>& comb, std::size_t n) {
    const std::size_t k = comb.size();
    std::size_t i = k;
    while (i > 0) {
        --i;
        if (comb[i] < n - (k - i)) {
            ++comb[i];
            for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
            return true;
        }
    }
    return false;
}

std::vector<std::size_t> sample_positions(std::mt19937_64& rng, std::size_t n, std::size_t k) {
    // Partial Fisher-Yates over an index array, then sort.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rand_below(rng, n - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<std::size_t> positions(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(positions.begin(), positions.end());
    return positions;
}

}  // namespace

std::size_t mask_count(std::size_t n_words, double mask_rate) {
    if (n_words == 0) throw ConfigError("mask_count: document has no words");
    const double product = mask_rate * static_cast<double>(n_words);
    auto k = static_cast<std::size_t>(std::floor(product + 0.5));
    if (k < 1) k = 1;
    if (k > n_words) k = n_words;
    return k;
}

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
        if (c > cap) return cap;
    }
    return static_cast<std::uint64_t>(c);
}

std::vector<MaskedVariant> generate_variants(const Document& doc, const MaskingConfig& cfg) {
    if (doc.words.empty()) throw ConfigError("generate_variants: document has no words");
    if (!(cfg.mask_rate > 0.0 && cfg.mask_rate <= 1.0)) {
        throw ConfigError("generate_variants: mask_rate must lie in (0,1]");
    }
    if (cfg.max_variants < 1) throw ConfigError("generate_variants: max_variants must be >= 1");

    const std::size_t n = doc.words.size();
    const std::size_t k = mask_count(n, cfg.mask_rate);
    const std::uint64_t cap = static_cast<std::uint64_t>(cfg.max_variants);
    const std::uint64_t combos = binomial_capped(n, k, cap + 1);
    const std::size_t target = static_cast<std::size_t>(std::min<std::uint64_t>(cap, combos));

    std::vector<std::vector<std::size_t>> chosen;
    chosen.reserve(target);

    if (combos <= cap) {
        // Few enough combinations: enumerate them all, lexicographically.
        std::vector<std::size_t> comb(k);
        std::iota(comb.begin(), comb.end(), 0);
        do {
            chosen.push_back(comb);
        } while (next_combination(comb, n));
    } else {
        std::mt19937_64 rng(mix_seed(cfg.seed, doc.doc_id));
        std::set<std::vector<std::size_t>> seen;
        const std::size_t retry_bound = 100 * cfg.max_variants;
        std::size_t attempts = 0;
        while (chosen.size() < target && attempts < retry_bound) {
            ++attempts;
            auto positions = sample_positions(rng, n, k);
            if (seen.insert(positions).second) chosen.push_back(std::move(positions));
        }
        // Retry bound exhausted: fill the remainder from the lexicographic
        // enumeration, skipping sets already drawn.
        if (chosen.size() < target) {
            std::vector<std::size_t> comb(k);
            std::iota(comb.begin(), comb.end(), 0);
            do {
                if (!seen.count(comb)) {
                    seen.insert(comb);
                    chosen.push_back(comb);
                }
            } while (chosen.size() < target && next_combination(comb, n));
        }
    }

    std::vector<MaskedVariant> variants;
    variants.reserve(chosen.size());
    for (std::size_t v = 0; v < chosen.size(); ++v) {
        MaskedVariant var;
        var.doc_id = doc.doc_id;
        var.variant_id = static_cast<std::uint32_t>(v);
        var.positions = chosen[v];
        var.gold.reserve(k);
        for (std::size_t p : var.positions) var.gold.push_back(doc.words[p]);
        var.language = doc.language;
        variants.push_back(std::move(var));
    }
    return variants;
}

std::vector<std::string> masked_words(const std::vector<std::string>& words,
                                      const std::vector<std::size_t>& positions,
                                      const std::string& placeholder) {
    std::vector<std::string> out = words;
    for (std::size_t p : positions) {
        if (p >= out.size()) {
            throw std::out_of_range("masked_words: position " + std::to_string(p) +
                                    " out of range for " + std::to_string(out.size()) + " words");
        }
        out[p] = placeholder;
    }
    return out;
}

std::string render_masked(const Document& doc, const std::vector<std::size_t>& positions,
                          const std::string& placeholder) {
    return join_words(masked_words(doc.words, positions, placeholder));
}

std::string join_words(const std::vector<std::string>& words) {
    std::string text;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) text += ' ';
        text += words[i];
    }
    return text;
}

std::vector<std::string> unmask_words(std::vector<std::string> masked,
                                      const std::vector<std::size_t>& positions,
                                      const std::vector<std::string>& gold) {
    if (positions.size() != gold.size()) {
        throw std::invalid_argument("unmask_words: positions and gold differ in length");
    }
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (positions[i] >= masked.size()) {
            throw std::out_of_range("unmask_words: position out of range");
        }
        masked[positions[i]] = gold[i];
    }
    return masked;
}

}  // namespace lacuna
