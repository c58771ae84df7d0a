#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lacuna/decode.hpp"

namespace lacuna {

struct VoteConfig {
    std::size_t top_k = 3;
    std::size_t min_systems = 1;
};

// Ranked vote outcome for one masked position. `ranked` holds up to top_k
// (word, vote count) pairs, counts non-increasing, equal counts ordered
// lexicographically by word. Empty when every system left the position blank.
struct RankedPrediction {
    std::string doc_id;
    std::uint32_t variant_id = 0;
    std::size_t position = 0;
    std::vector<std::pair<std::string, std::size_t>> ranked;
};

// Counts identical predicted words across runs at each (doc_id, variant_id,
// position) key. Every run must cover exactly the same key set; the first
// divergent key is reported otherwise. Empty predictions never become
// candidates. Output is sorted by key.
std::vector<RankedPrediction> majority_vote(
    const std::vector<std::vector<PredictionRecord>>& runs, const VoteConfig& cfg);

}  // namespace lacuna
