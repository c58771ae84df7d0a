#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace lacuna {

struct TokenizerConfig {
    std::string mask_placeholder = "[MASK]";
    std::string unk_placeholder = "[UNK]";
    std::string end_of_text = "<eot>";
    std::size_t chunk_len = 3;
};

// Subword inventory with dense ids. A word maps to one word-initial chunk
// followed by continuation chunks; the same string may exist as both a
// word-initial and a continuation entry under distinct ids. Ids 0..2 are
// reserved for the mask placeholder, the unk placeholder, and end-of-text.
class SubwordVocab {
public:
    struct Entry {
        std::string text;
        bool begins_word = false;
    };

    static constexpr std::uint32_t kNotFound = UINT32_MAX;

    explicit SubwordVocab(const TokenizerConfig& cfg = {});

    std::uint32_t size() const { return static_cast<std::uint32_t>(entries_.size()); }
    const Entry& entry(std::uint32_t id) const { return entries_.at(id); }
    bool begins_word(std::uint32_t id) const { return entries_.at(id).begins_word; }
    const std::string& text(std::uint32_t id) const { return entries_.at(id).text; }

    std::uint32_t mask_id() const { return mask_id_; }
    std::uint32_t unk_id() const { return unk_id_; }
    std::uint32_t eot_id() const { return eot_id_; }

    std::uint32_t lookup(const std::string& text, bool begins_word) const;
    std::uint32_t add(const std::string& text, bool begins_word);
    std::uint32_t get_or_add(const std::string& text, bool begins_word);

    const TokenizerConfig& config() const { return cfg_; }

private:
    TokenizerConfig cfg_;
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::uint32_t mask_id_ = 0;
    std::uint32_t unk_id_ = 0;
    std::uint32_t eot_id_ = 0;

    static std::string key(const std::string& text, bool begins_word);
};

// Fixed-width byte chunks, at most chunk_len each.
std::vector<std::string> chunk_word(const std::string& word, std::size_t chunk_len);

// Placeholder-aware: a word equal to the mask/unk placeholder maps to its
// reserved id; unknown chunks map to the unk id.
std::vector<std::uint32_t> tokenize_word(const SubwordVocab& vocab, const std::string& word);

// Whitespace-split text, each word tokenized as above.
std::vector<std::uint32_t> tokenize_text(const SubwordVocab& vocab, const std::string& text);

// Word-initial chunks are preceded by a space (except at the start).
std::string detokenize(const SubwordVocab& vocab, std::span<const std::uint32_t> ids);

}  // namespace lacuna
