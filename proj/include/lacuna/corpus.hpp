#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lacuna {

// One input row: a single word with its position inside a document.
struct TokenRecord {
    std::string doc_id;
    std::uint64_t line_no = 0;
    std::uint64_t word_index = 0;
    std::string surface;
    std::string language;
    std::map<std::string, std::string> extras;
};

// A document reconstructed from its token rows. Words are in global order
// (line ascending, word index ascending within a line); line_starts holds
// the global index where each line begins.
struct Document {
    std::string doc_id;
    std::string language;
    std::vector<std::string> words;
    std::vector<std::size_t> line_starts;
};

using Corpus = std::vector<Document>;

struct SplitConfig {
    double dev_fraction = 0.01;
    std::uint64_t seed = 0;
    std::size_t min_doc_words_dev = 2;
};

struct LanguageStats {
    std::uint64_t tokens = 0;
    std::map<std::string, std::uint64_t> word_freq;
};

struct CorpusStats {
    std::uint64_t documents = 0;
    std::uint64_t tokens = 0;
    std::map<std::string, LanguageStats> per_language;
};

// Throws IngestError if the surface is empty, contains whitespace, or is a
// reserved placeholder literal.
void validate_surface(const std::string& surface);

// TSV with header: doc_id line_no word_index surface language extras_json.
// Errors carry the 1-based file line number.
std::vector<TokenRecord> read_token_tsv(std::istream& in, const std::string& source_name);
std::vector<TokenRecord> read_token_tsv_file(const std::string& path);
void write_token_tsv(std::ostream& out, const std::vector<TokenRecord>& rows);

/// Reconstructs one Document per distinct doc_id, in first-appearance order.
Corpus ingest_tokens(const std::vector<TokenRecord>& rows);

// Canonical row form of a document: lines renumbered 0.., word indices 0..
// within each line, empty extras.
std::vector<TokenRecord> document_rows(const Document& doc);

void sort_rows_by_key(std::vector<TokenRecord>& rows);

/// Seeded shuffle, then a dev_fraction cut filtered by minimum word count.
std::pair<Corpus, Corpus> split_dev(const Corpus& corpus, const SplitConfig& cfg);

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace lacuna
