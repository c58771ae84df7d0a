#include "lacuna/subword.hpp"

#include <cctype>
#include <sstream>

#include "lacuna/errors.hpp"

namespace lacuna {

std::string SubwordVocab::key(const std::string& text, bool begins_word) {
    std::string k;
    k.reserve(text.size() + 2);
    k += begins_word ? 'B' : 'C';
    k += '\x01';
    k += text;
    return k;
}

SubwordVocab::SubwordVocab(const TokenizerConfig& cfg) : cfg_(cfg) {
    if (cfg_.mask_placeholder == cfg_.unk_placeholder) {
        throw ConfigError("mask and unk placeholders must differ");
    }
    mask_id_ = add(cfg_.mask_placeholder, true);
    unk_id_ = add(cfg_.unk_placeholder, true);
    eot_id_ = add(cfg_.end_of_text, false);
}

std::uint32_t SubwordVocab::lookup(const std::string& text, bool begins_word) const {
    auto it = index_.find(key(text, begins_word));
    return it == index_.end() ? kNotFound : it->second;
}

std::uint32_t SubwordVocab::add(const std::string& text, bool begins_word) {
    const std::string k = key(text, begins_word);
    if (index_.count(k)) {
        throw ConfigError("duplicate vocab entry: " + text);
    }
    const auto id = static_cast<std::uint32_t>(entries_.size());
    entries_.push_back(Entry{text, begins_word});
    index_.emplace(k, id);
    return id;
}

std::uint32_t SubwordVocab::get_or_add(const std::string& text, bool begins_word) {
    const std::uint32_t existing = lookup(text, begins_word);
    return existing == kNotFound ? add(text, begins_word) : existing;
}

std::vector<std::string> chunk_word(const std::string& word, std::size_t chunk_len) {
    std::vector<std::string> chunks;
    if (chunk_len == 0) throw ConfigError("chunk_len must be >= 1");
    for (std::size_t i = 0; i < word.size(); i += chunk_len) {
        chunks.push_back(word.substr(i, chunk_len));
    }
    return chunks;
}

std::vector<std::uint32_t> tokenize_word(const SubwordVocab& vocab, const std::string& word) {
    const auto& cfg = vocab.config();
    if (word == cfg.mask_placeholder) return {vocab.mask_id()};
    if (word == cfg.unk_placeholder) return {vocab.unk_id()};
    std::vector<std::uint32_t> ids;
    const auto chunks = chunk_word(word, cfg.chunk_len);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const std::uint32_t id = vocab.lookup(chunks[i], i == 0);
        ids.push_back(id == SubwordVocab::kNotFound ? vocab.unk_id() : id);
    }
    return ids;
}

std::vector<std::uint32_t> tokenize_text(const SubwordVocab& vocab, const std::string& text) {
    std::vector<std::uint32_t> ids;
    std::istringstream in(text);
    std::string word;
    while (in >> word) {
        const auto word_ids = tokenize_word(vocab, word);
        ids.insert(ids.end(), word_ids.begin(), word_ids.end());
    }
    return ids;
}

std::string detokenize(const SubwordVocab& vocab, std::span<const std::uint32_t> ids) {
    std::string text;
    for (std::uint32_t id : ids) {
        const auto& e = vocab.entry(id);
        if (e.begins_word && !text.empty()) text += ' ';
        text += e.text;
    }
    return text;
}

}  // namespace lacuna
