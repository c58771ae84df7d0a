#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lacuna/backend.hpp"
#include "lacuna/corpus.hpp"
#include "lacuna/subword.hpp"

namespace lacuna {

struct NgramConfig {
    std::uint32_t order = 3;
    double kappa = 0.01;   // add-k smoothing constant
    double backoff = 0.4;  // stupid-backoff factor
    TokenizerConfig tokenizer;
};

// Count-based n-gram model over subword ids.
//
// Scoring rule: the longest context suffix observed in training is scored
// with add-kappa smoothing over the full vocabulary; a context suffix never
// observed at some order contributes the backoff-scaled distribution of the
// next shorter suffix. next_distribution normalizes the resulting scores.
class NgramModel {
public:
    NgramModel(SubwordVocab vocab, std::uint32_t order, double kappa, double backoff);

    static NgramModel train(const Corpus& corpus, const NgramConfig& cfg);

    const SubwordVocab& vocab() const { return vocab_; }
    std::uint32_t order() const { return order_; }
    double kappa() const { return kappa_; }
    double backoff() const { return backoff_; }

    // Adds an observation of `next` following `context` (|context| < order).
    void add_count(std::span<const std::uint32_t> context, std::uint32_t next,
                   std::uint64_t count = 1);

    std::uint64_t count(std::span<const std::uint32_t> context, std::uint32_t next) const;
    std::uint64_t context_total(std::span<const std::uint32_t> context) const;
    bool has_context(std::span<const std::uint32_t> context) const;

    /// Probability vector over the vocabulary; sums to 1 within 1e-9.
    std::vector<double> next_distribution(std::span<const std::uint32_t> context) const;

    void save(const std::string& path) const;
    static NgramModel load(const std::string& path);
    std::string serialize() const;

private:
    struct ContextCounts {
        std::map<std::uint32_t, std::uint64_t> next;
        std::uint64_t total = 0;
    };

    SubwordVocab vocab_;
    std::uint32_t order_;
    double kappa_;
    double backoff_;
    // levels_[m-1] holds order-m contexts keyed by their packed (m-1) ids.
    std::vector<std::unordered_map<std::string, ContextCounts>> levels_;

    static std::string pack(std::span<const std::uint32_t> ids);
    void score_level(std::uint32_t m, std::span<const std::uint32_t> context,
                     std::vector<double>& out) const;
};

// The local backend: free-form sampling plus the scored contract, both
// backed by one trained model.
class NgramBackend final : public TextBackend, public ScoredBackend {
public:
    explicit NgramBackend(NgramModel model, std::string label = "ngram")
        : model_(std::move(model)), label_(std::move(label)) {}

    std::string generate(const std::string& prompt, const SamplingParams& params) override;
    std::string id() const override { return label_; }

    const SubwordVocab& vocab() const override { return model_.vocab(); }
    std::vector<double> next_distribution(std::span<const std::uint32_t> context) const override {
        return model_.next_distribution(context);
    }

    const NgramModel& model() const { return model_; }

private:
    NgramModel model_;
    std::string label_;
};

// Deterministic draw from a distribution at the given temperature;
// temperature 0 is argmax with lowest-id tie-break.
std::uint32_t sample_from(const std::vector<double>& dist, double temperature,
                          std::mt19937_64& rng);

}  // namespace lacuna
