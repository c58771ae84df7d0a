#include "lacuna/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "lacuna/errors.hpp"

namespace lacuna {

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    std::size_t line = 1;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char take() {
        const char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }
};

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
}

void skip_spaces(Cursor& c) {
    while (!c.done() && (c.peek() == ' ' || c.peek() == '\t')) c.take();
}

void skip_to_eol(Cursor& c) {
    while (!c.done() && c.peek() != '\n') c.take();
    if (!c.done()) c.take();
}

bool is_bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

std::string read_bare(Cursor& c) {
    std::string word;
    while (!c.done() && is_bare_char(c.peek())) word += c.take();
    return word;
}

std::string read_quoted(Cursor& c, const std::string& source) {
    const std::size_t line = c.line;
    c.take();  // opening quote
    std::string value;
    while (true) {
        if (c.done() || c.peek() == '\n') parse_fail(source, line, "unterminated string");
        const char ch = c.take();
        if (ch == '"') return value;
        if (ch != '\\') {
            value += ch;
            continue;
        }
        if (c.done()) parse_fail(source, line, "unterminated escape");
        const char esc = c.take();
        switch (esc) {
            case '"': value += '"'; break;
            case '\\': value += '\\'; break;
            case 'n': value += '\n'; break;
            case 't': value += '\t'; break;
            default: parse_fail(source, line, std::string("unknown escape \\") + esc);
        }
    }
}

ConfigMap::Value read_scalar(Cursor& c, const std::string& source) {
    const std::size_t line = c.line;
    if (c.peek() == '"') return read_quoted(c, source);

    std::string word;
    while (!c.done() && c.peek() != '\n' && c.peek() != '#' && c.peek() != ',' &&
           c.peek() != ']') {
        word += c.take();
    }
    while (!word.empty() && (word.back() == ' ' || word.back() == '\t')) word.pop_back();
    if (word.empty()) parse_fail(source, line, "missing value");

    if (word == "true") return true;
    if (word == "false") return false;

    const bool looks_float = word.find_first_of(".eE") != std::string::npos &&
                             word.find_first_not_of("+-0123456789.eE") == std::string::npos;
    try {
        std::size_t used = 0;
        if (looks_float) {
            const double d = std::stod(word, &used);
            if (used == word.size()) return d;
        } else {
            const std::int64_t i = std::stoll(word, &used);
            if (used == word.size()) return i;
        }
    } catch (const std::exception&) {
        // fall through to the error below
    }
    parse_fail(source, line, "unquoted value \"" + word + "\" is not a number or boolean");
}

}  // namespace

ConfigMap ConfigMap::parse_string(const std::string& text, const std::string& source_name) {
    ConfigMap map;
    map.source_ = source_name;

    Cursor c{text};
    std::string section;
    while (!c.done()) {
        skip_spaces(c);
        if (c.done()) break;
        const char ch = c.peek();
        if (ch == '\n' || ch == '#') {
            skip_to_eol(c);
            continue;
        }
        if (ch == '[') {
            const std::size_t line = c.line;
            c.take();
            section = read_bare(c);
            if (section.empty() || c.done() || c.peek() != ']') {
                parse_fail(source_name, line, "malformed section header");
            }
            c.take();
            skip_spaces(c);
            if (!c.done() && c.peek() != '\n' && c.peek() != '#') {
                parse_fail(source_name, line, "trailing characters after section header");
            }
            skip_to_eol(c);
            continue;
        }

        const std::size_t line = c.line;
        const std::string key = read_bare(c);
        if (key.empty()) parse_fail(source_name, line, "expected a key");
        skip_spaces(c);
        if (c.done() || c.peek() != '=') parse_fail(source_name, line, "expected '=' after key");
        c.take();
        skip_spaces(c);
        if (c.done()) parse_fail(source_name, line, "missing value");

        Value value;
        if (c.peek() == '[') {
            c.take();
            std::vector<std::string> items;
            while (true) {
                skip_spaces(c);
                if (c.done() || c.peek() == '\n') parse_fail(source_name, line, "unterminated array");
                if (c.peek() == ']') {
                    c.take();
                    break;
                }
                Value item = read_scalar(c, source_name);
                if (const auto* s = std::get_if<std::string>(&item)) {
                    items.push_back(*s);
                } else {
                    parse_fail(source_name, line, "arrays may only hold strings");
                }
                skip_spaces(c);
                if (!c.done() && c.peek() == ',') c.take();
            }
            value = std::move(items);
        } else {
            value = read_scalar(c, source_name);
        }

        const std::string path = section.empty() ? key : section + "." + key;
        if (!map.values_.emplace(path, std::move(value)).second) {
            parse_fail(source_name, line, "duplicate key \"" + path + "\"");
        }
        skip_spaces(c);
        if (!c.done() && c.peek() != '\n' && c.peek() != '#') {
            parse_fail(source_name, line, "trailing characters after value");
        }
        skip_to_eol(c);
    }
    return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path);
}

const ConfigMap::Value* ConfigMap::find(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    read_[key] = true;
    return &it->second;
}

void ConfigMap::type_error(const std::string& key, const std::string& expected) const {
    throw ConfigError(source_ + ": field \"" + key + "\" must be " + expected);
}

std::string ConfigMap::get_string(const std::string& key) const {
    const Value* v = find(key);
    if (!v) throw ConfigError(source_ + ": missing required field \"" + key + "\"");
    if (const auto* s = std::get_if<std::string>(v)) return *s;
    type_error(key, "a string");
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* s = std::get_if<std::string>(v)) return *s;
    type_error(key, "a string");
}

std::int64_t ConfigMap::get_int(const std::string& key, std::int64_t fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
    type_error(key, "an integer");
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* d = std::get_if<double>(v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
    type_error(key, "a number");
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* b = std::get_if<bool>(v)) return *b;
    type_error(key, "a boolean");
}

std::vector<std::string> ConfigMap::get_string_array(const std::string& key,
                                                     std::vector<std::string> fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* a = std::get_if<std::vector<std::string>>(v)) return *a;
    if (const auto* s = std::get_if<std::string>(v)) return {*s};
    type_error(key, "an array of strings");
}

std::vector<std::string> ConfigMap::unread_keys() const {
    std::vector<std::string> unread;
    for (const auto& [key, value] : values_) {
        if (!read_.count(key)) unread.push_back(key);
    }
    return unread;
}

namespace {

std::uint64_t require_uint(const ConfigMap& map, const std::string& key, std::int64_t fallback) {
    const std::int64_t v = map.get_int(key, fallback);
    if (v < 0) throw ConfigError(map.source() + ": field \"" + key + "\" must be non-negative");
    return static_cast<std::uint64_t>(v);
}

std::size_t require_positive(const ConfigMap& map, const std::string& key, std::int64_t fallback) {
    const std::int64_t v = map.get_int(key, fallback);
    if (v < 1) throw ConfigError(map.source() + ": field \"" + key + "\" must be >= 1");
    return static_cast<std::size_t>(v);
}

}  // namespace

PipelineConfig pipeline_config_from(const ConfigMap& map) {
    PipelineConfig cfg;

    cfg.corpus_input = map.get_string("corpus.input");
    cfg.split.dev_fraction = map.get_double("corpus.dev_fraction", cfg.split.dev_fraction);
    if (cfg.split.dev_fraction <= 0.0 || cfg.split.dev_fraction >= 1.0) {
        throw ConfigError(map.source() + ": field \"corpus.dev_fraction\" must be in (0, 1)");
    }
    cfg.split.seed = require_uint(map, "corpus.split_seed", 0);
    cfg.split.min_doc_words_dev =
        require_positive(map, "corpus.min_dev_words",
                         static_cast<std::int64_t>(cfg.split.min_doc_words_dev));

    cfg.masking.mask_rate = map.get_double("masking.rate", cfg.masking.mask_rate);
    cfg.masking.max_variants = require_positive(
        map, "masking.max_variants", static_cast<std::int64_t>(cfg.masking.max_variants));
    cfg.masking.seed = require_uint(map, "masking.seed", 0);
    if (cfg.masking.mask_rate <= 0.0 || cfg.masking.mask_rate > 1.0) {
        throw ConfigError(map.source() + ": field \"masking.rate\" must be in (0, 1]");
    }
    cfg.masking.mask_placeholder =
        map.get_string("masking.mask_placeholder", cfg.masking.mask_placeholder);
    cfg.masking.unk_placeholder =
        map.get_string("masking.unk_placeholder", cfg.masking.unk_placeholder);
    if (cfg.masking.mask_placeholder.empty() || cfg.masking.unk_placeholder.empty() ||
        cfg.masking.mask_placeholder == cfg.masking.unk_placeholder) {
        throw ConfigError(map.source() +
                          ": fields \"masking.mask_placeholder\" and "
                          "\"masking.unk_placeholder\" must be non-empty and distinct");
    }

    const std::int64_t order = map.get_int("ngram.order", cfg.ngram.order);
    if (order < 1 || order > 16) {
        throw ConfigError(map.source() + ": field \"ngram.order\" must be in [1, 16]");
    }
    cfg.ngram.order = static_cast<std::uint32_t>(order);
    cfg.ngram.kappa = map.get_double("ngram.kappa", cfg.ngram.kappa);
    cfg.ngram.backoff = map.get_double("ngram.backoff", cfg.ngram.backoff);
    cfg.ngram.tokenizer.chunk_len = require_positive(
        map, "ngram.chunk_len", static_cast<std::int64_t>(cfg.ngram.tokenizer.chunk_len));
    cfg.ngram.tokenizer.mask_placeholder = cfg.masking.mask_placeholder;
    cfg.ngram.tokenizer.unk_placeholder = cfg.masking.unk_placeholder;
    if (cfg.ngram.kappa <= 0.0) {
        throw ConfigError(map.source() + ": field \"ngram.kappa\" must be > 0");
    }
    if (cfg.ngram.backoff <= 0.0 || cfg.ngram.backoff > 1.0) {
        throw ConfigError(map.source() + ": field \"ngram.backoff\" must be in (0, 1]");
    }

    const auto method_names = map.get_string_array(
        "predict.methods", {"all", "one-by-one", "restore"});
    cfg.methods.clear();
    for (const auto& name : method_names) cfg.methods.push_back(method_from_name(name));
    if (cfg.methods.empty()) {
        throw ConfigError(map.source() + ": field \"predict.methods\" must not be empty");
    }
    cfg.system_id = map.get_string("predict.system_id", cfg.system_id);
    cfg.sampling.temperature = map.get_double("predict.temperature", cfg.sampling.temperature);
    cfg.sampling.max_new_tokens = require_positive(
        map, "predict.max_new_tokens", static_cast<std::int64_t>(cfg.sampling.max_new_tokens));
    cfg.sampling.seed = require_uint(map, "predict.seed", 0);
    cfg.ban_mask_token = map.get_bool("predict.ban_mask_token", cfg.ban_mask_token);
    cfg.mode = execution_mode_from_name(
        map.get_string("predict.mode", execution_mode_name(cfg.mode)));

    cfg.vote.top_k = require_positive(map, "ensemble.top_k",
                                      static_cast<std::int64_t>(cfg.vote.top_k));
    cfg.vote.min_systems = require_positive(map, "ensemble.min_systems",
                                            static_cast<std::int64_t>(cfg.vote.min_systems));

    cfg.eval_top_n = require_positive(map, "evaluate.top_n",
                                      static_cast<std::int64_t>(cfg.eval_top_n));

    cfg.output_dir = map.get_string("output.dir", cfg.output_dir);

    const auto unread = map.unread_keys();
    if (!unread.empty()) {
        throw ConfigError(map.source() + ": unknown field \"" + unread.front() + "\"");
    }
    return cfg;
}

}  // namespace lacuna
