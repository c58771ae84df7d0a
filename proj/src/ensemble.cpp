#include "lacuna/ensemble.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "lacuna/errors.hpp"

namespace lacuna {

namespace {

using Key = std::tuple<std::string, std::uint32_t, std::size_t>;

std::string key_string(const Key& key) {
    return "(" + std::get<0>(key) + ", " + std::to_string(std::get<1>(key)) + ", " +
           std::to_string(std::get<2>(key)) + ")";
}

std::map<Key, std::vector<std::string>> index_run(const std::vector<PredictionRecord>& run) {
    std::map<Key, std::vector<std::string>> by_key;
    for (const auto& rec : run) {
        by_key[{rec.doc_id, rec.variant_id, rec.position}].push_back(rec.predicted);
    }
    return by_key;
}

}  // namespace

std::vector<RankedPrediction> majority_vote(
    const std::vector<std::vector<PredictionRecord>>& runs, const VoteConfig& cfg) {
    if (cfg.top_k < 1) throw ConfigError("majority_vote: top_k must be >= 1");
    if (cfg.min_systems < 1) throw ConfigError("majority_vote: min_systems must be >= 1");
    if (runs.size() < cfg.min_systems) {
        throw EvalError("majority_vote: " + std::to_string(runs.size()) + " run(s) given, " +
                        std::to_string(cfg.min_systems) + " required");
    }

    // Per key, per word, vote count. std::map keeps keys and candidate
    // words in the canonical (sorted) order, which settles ties for free.
    std::map<Key, std::map<std::string, std::size_t>> votes;
    const auto reference = index_run(runs.front());
    for (const auto& [key, preds] : reference) {
        auto& tally = votes[key];
        for (const auto& word : preds) {
            if (!word.empty()) ++tally[word];
        }
    }

    for (std::size_t r = 1; r < runs.size(); ++r) {
        const auto by_key = index_run(runs[r]);
        for (const auto& [key, preds] : by_key) {
            if (!reference.count(key)) {
                throw EvalError("majority_vote: run " + std::to_string(r) + " has extra key " +
                                key_string(key));
            }
            auto& tally = votes[key];
            for (const auto& word : preds) {
                if (!word.empty()) ++tally[word];
            }
        }
        if (by_key.size() != reference.size()) {
            for (const auto& [key, preds] : reference) {
                if (!by_key.count(key)) {
                    throw EvalError("majority_vote: run " + std::to_string(r) + " is missing key " +
                                    key_string(key));
                }
            }
        }
    }

    std::vector<RankedPrediction> result;
    result.reserve(votes.size());
    for (const auto& [key, tally] : votes) {
        RankedPrediction rp;
        rp.doc_id = std::get<0>(key);
        rp.variant_id = std::get<1>(key);
        rp.position = std::get<2>(key);
        rp.ranked.assign(tally.begin(), tally.end());
        // Count descending; the map already ordered equal counts by word.
        std::stable_sort(rp.ranked.begin(), rp.ranked.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        if (rp.ranked.size() > cfg.top_k) rp.ranked.resize(cfg.top_k);
        result.push_back(std::move(rp));
    }
    return result;
}

}  // namespace lacuna
