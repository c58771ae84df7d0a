#include "lacuna/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "lacuna/errors.hpp"
#include "lacuna/rng.hpp"

namespace lacuna {

namespace {

constexpr const char* kTsvHeader = "doc_id\tline_no\tword_index\tsurface\tlanguage\textras_json";

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

std::uint64_t parse_u64(const std::string& text, const std::string& where) {
    std::uint64_t value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty()) {
        throw IngestError(where + ": expected a non-negative integer, got \"" + text + "\"");
    }
    return value;
}

std::map<std::string, std::string> parse_extras(const std::string& text, const std::string& where) {
    std::map<std::string, std::string> extras;
    if (text.empty()) return extras;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IngestError(where + ": extras_json is not valid JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw IngestError(where + ": extras_json must be a JSON object");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.value().is_string()) {
            extras[it.key()] = it.value().get<std::string>();
        } else {
            extras[it.key()] = it.value().dump();
        }
    }
    return extras;
}

}  // namespace

void validate_surface(const std::string& surface) {
    if (surface.empty()) throw IngestError("surface is empty");
    for (unsigned char c : surface) {
        if (std::isspace(c)) {
            throw IngestError("surface \"" + surface + "\" contains whitespace");
        }
    }
    if (surface == "[MASK]" || surface == "[UNK]") {
        throw IngestError("surface collides with reserved placeholder \"" + surface + "\"");
    }
}

std::vector<TokenRecord> read_token_tsv(std::istream& in, const std::string& source_name) {
    std::vector<TokenRecord> rows;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw IngestError(source_name + ": empty file, expected header line");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTsvHeader) {
        throw IngestError(source_name + ":1: bad header, expected \"" + std::string(kTsvHeader) + "\"");
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = source_name + ":" + std::to_string(line_no);
        auto fields = split_tabs(line);
        if (fields.size() != 6) {
            throw IngestError(where + ": expected 6 tab-separated fields, got " +
                              std::to_string(fields.size()));
        }
        TokenRecord rec;
        rec.doc_id = fields[0];
        if (rec.doc_id.empty()) throw IngestError(where + ": empty doc_id");
        rec.line_no = parse_u64(fields[1], where);
        rec.word_index = parse_u64(fields[2], where);
        rec.surface = fields[3];
        try {
            validate_surface(rec.surface);
        } catch (const IngestError& e) {
            throw IngestError(where + ": " + e.what());
        }
        rec.language = fields[4];
        rec.extras = parse_extras(fields[5], where);
        rows.push_back(std::move(rec));
    }
    return rows;
}

std::vector<TokenRecord> read_token_tsv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file: " + path);
    return read_token_tsv(in, path);
}

void write_token_tsv(std::ostream& out, const std::vector<TokenRecord>& rows) {
    out << kTsvHeader << '\n';
    for (const auto& rec : rows) {
        nlohmann::json extras = nlohmann::json::object();
        for (const auto& [k, v] : rec.extras) extras[k] = v;
        out << rec.doc_id << '\t' << rec.line_no << '\t' << rec.word_index << '\t'
            << rec.surface << '\t' << rec.language << '\t' << extras.dump() << '\n';
    }
}

Corpus ingest_tokens(const std::vector<TokenRecord>& rows) {
    struct DocAccum {
        std::string language;
        std::vector<const TokenRecord*> records;
        std::set<std::pair<std::uint64_t, std::uint64_t>> seen_keys;
    };
    std::unordered_map<std::string, std::size_t> index_of;
    std::vector<std::string> order;
    std::vector<DocAccum> accums;

    for (const auto& rec : rows) {
        validate_surface(rec.surface);
        auto [it, inserted] = index_of.try_emplace(rec.doc_id, accums.size());
        if (inserted) {
            order.push_back(rec.doc_id);
            accums.emplace_back();
            accums.back().language = rec.language;
        }
        DocAccum& acc = accums[it->second];
        if (acc.language != rec.language) {
            throw IngestError("conflicting language for doc_id \"" + rec.doc_id + "\": \"" +
                              acc.language + "\" vs \"" + rec.language + "\"");
        }
        if (!acc.seen_keys.emplace(rec.line_no, rec.word_index).second) {
            throw IngestError("duplicate token key (doc_id=" + rec.doc_id +
                              ", line_no=" + std::to_string(rec.line_no) +
                              ", word_index=" + std::to_string(rec.word_index) + ")");
        }
        acc.records.push_back(&rec);
    }

    Corpus corpus;
    corpus.reserve(order.size());
    for (std::size_t d = 0; d < order.size(); ++d) {
        DocAccum& acc = accums[d];
        std::sort(acc.records.begin(), acc.records.end(),
                  [](const TokenRecord* a, const TokenRecord* b) {
                      if (a->line_no != b->line_no) return a->line_no < b->line_no;
                      return a->word_index < b->word_index;
                  });
        Document doc;
        doc.doc_id = order[d];
        doc.language = acc.language;
        doc.words.reserve(acc.records.size());
        std::uint64_t current_line = 0;
        bool first = true;
        for (const TokenRecord* rec : acc.records) {
            if (first || rec->line_no != current_line) {
                doc.line_starts.push_back(doc.words.size());
                current_line = rec->line_no;
                first = false;
            }
            doc.words.push_back(rec->surface);
        }
        corpus.push_back(std::move(doc));
    }
    return corpus;
}

std::vector<TokenRecord> document_rows(const Document& doc) {
    std::vector<TokenRecord> rows;
    rows.reserve(doc.words.size());
    for (std::size_t line = 0; line < doc.line_starts.size(); ++line) {
        const std::size_t begin = doc.line_starts[line];
        const std::size_t end =
            line + 1 < doc.line_starts.size() ? doc.line_starts[line + 1] : doc.words.size();
        for (std::size_t g = begin; g < end; ++g) {
            TokenRecord rec;
            rec.doc_id = doc.doc_id;
            rec.line_no = line;
            rec.word_index = g - begin;
            rec.surface = doc.words[g];
            rec.language = doc.language;
            rows.push_back(std::move(rec));
        }
    }
    return rows;
}

void sort_rows_by_key(std::vector<TokenRecord>& rows) {
    std::sort(rows.begin(), rows.end(), [](const TokenRecord& a, const TokenRecord& b) {
        if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
        if (a.line_no != b.line_no) return a.line_no < b.line_no;
        return a.word_index < b.word_index;
    });
}

std::pair<Corpus, Corpus> split_dev(const Corpus& corpus, const SplitConfig& cfg) {
    if (corpus.empty()) throw ConfigError("split_dev: corpus is empty");
    if (!(cfg.dev_fraction > 0.0 && cfg.dev_fraction < 1.0)) {
        throw ConfigError("split_dev: dev_fraction must lie in (0,1), got " +
                          std::to_string(cfg.dev_fraction));
    }
    const std::size_t n = corpus.size();
    const std::size_t cut =
        static_cast<std::size_t>(std::floor(cfg.dev_fraction * static_cast<double>(n)));
    if (cut == 0) {
        throw ConfigError("split_dev: dev_fraction * corpus size is below one document");
    }

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(cfg.seed);
    deterministic_shuffle(perm, rng);

    std::vector<bool> in_dev(n, false);
    Corpus dev;
    for (std::size_t i = 0; i < cut; ++i) {
        const std::size_t idx = perm[i];
        if (corpus[idx].words.size() >= cfg.min_doc_words_dev) {
            in_dev[idx] = true;
            dev.push_back(corpus[idx]);
        }
    }
    Corpus train;
    train.reserve(n - dev.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (!in_dev[i]) train.push_back(corpus[i]);
    }
    return {std::move(train), std::move(dev)};
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats stats;
    stats.documents = corpus.size();
    for (const auto& doc : corpus) {
        stats.tokens += doc.words.size();
        auto& lang = stats.per_language[doc.language];
        lang.tokens += doc.words.size();
        for (const auto& w : doc.words) ++lang.word_freq[w];
    }
    return stats;
}

}  // namespace lacuna
