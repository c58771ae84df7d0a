#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lacuna/subword.hpp"

namespace lacuna {

struct SamplingParams {
    double temperature = 0.2;  // 0 means strict argmax
    std::size_t max_new_tokens = 64;
    std::vector<std::string> stop_sequences;
    std::uint64_t seed = 0;
};

// Free-form text generation capability.
class TextBackend {
public:
    virtual ~TextBackend() = default;
    virtual std::string generate(const std::string& prompt, const SamplingParams& params) = 0;
    virtual std::string id() const = 0;
};

// Scored-LM capability: a full next-token distribution over a subword
// vocabulary. Required by the restore decoder.
class ScoredBackend {
public:
    virtual ~ScoredBackend() = default;
    virtual const SubwordVocab& vocab() const = 0;
    virtual std::vector<double> next_distribution(std::span<const std::uint32_t> context) const = 0;
};

}  // namespace lacuna
