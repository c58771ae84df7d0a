#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lacuna/corpus.hpp"
#include "lacuna/ensemble.hpp"
#include "lacuna/masking.hpp"
#include "lacuna/ngram.hpp"
#include "lacuna/prompts.hpp"
#include "lacuna/runner.hpp"

namespace lacuna {

// Flat TOML-style document: `[section]` headers, `key = value` pairs,
// `#` comments. Values are strings, integers, floats, booleans, or arrays
// of strings. Keys are addressed as "section.key".
class ConfigMap {
public:
    using Value = std::variant<std::string, std::int64_t, double, bool, std::vector<std::string>>;

    static ConfigMap parse_file(const std::string& path);
    static ConfigMap parse_string(const std::string& text, const std::string& source_name);

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_string_array(const std::string& key,
                                              std::vector<std::string> fallback) const;

    // Keys present in the document but never read; non-empty means a typo'd
    // or unsupported field.
    std::vector<std::string> unread_keys() const;

    const std::string& source() const { return source_; }

private:
    std::string source_;
    std::map<std::string, Value> values_;
    mutable std::map<std::string, bool> read_;

    const Value* find(const std::string& key) const;
    [[noreturn]] void type_error(const std::string& key, const std::string& expected) const;
};

// Schema for the `run` pipeline, one section per stage.
struct PipelineConfig {
    // [corpus]
    std::string corpus_input;  // token TSV
    SplitConfig split;

    // [masking]
    MaskingConfig masking;

    // [ngram]
    NgramConfig ngram;
    std::uint64_t ngram_seed = 0;  // reserved for sampling inside generate()

    // [predict]
    std::vector<Method> methods{Method::All, Method::OneByOne, Method::Restore};
    std::string system_id = "ngram";
    SamplingParams sampling;
    bool ban_mask_token = true;
    ExecutionMode mode = ExecutionMode::Parallel;

    // [ensemble]
    VoteConfig vote;

    // [evaluate]
    std::size_t eval_top_n = 20;

    // [output]
    std::string output_dir = "out";
};

// Validates and extracts the schema; unknown keys and malformed values are
// ConfigErrors naming the field path.
PipelineConfig pipeline_config_from(const ConfigMap& map);

}  // namespace lacuna
