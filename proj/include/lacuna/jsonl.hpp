#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lacuna/corpus.hpp"
#include "lacuna/decode.hpp"
#include "lacuna/ensemble.hpp"
#include "lacuna/eval.hpp"
#include "lacuna/masking.hpp"
#include "lacuna/prompts.hpp"

// JSONL persistence for pipeline artifacts. One value per line, keys in a
// fixed order (nlohmann::ordered_json), so identical inputs produce
// byte-identical files.

namespace lacuna {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const Document& doc);
ordered_json to_json(const MaskedVariant& variant, const std::string& masked_text);
ordered_json to_json(const PredictionRecord& rec);
ordered_json to_json(const RankedPrediction& rp);
ordered_json to_json(const PromptInstance& prompt);
ordered_json to_json(const FrequencyTable& table);
ordered_json to_json(const EvalBreakdown& breakdown);
ordered_json to_json(const EvalReport& report);

Document document_from_json(const ordered_json& j);
// Returns the variant; *masked_text receives the audit text when non-null.
MaskedVariant variant_from_json(const ordered_json& j, std::string* masked_text = nullptr);
PredictionRecord prediction_from_json(const ordered_json& j);
RankedPrediction ranked_from_json(const ordered_json& j);

std::vector<Document> read_documents_jsonl(const std::string& path);
void write_documents_jsonl(const std::string& path, const std::vector<Document>& docs);

struct VariantFileEntry {
    MaskedVariant variant;
    std::string masked_text;
};
std::vector<VariantFileEntry> read_variants_jsonl(const std::string& path);
void write_variants_jsonl(const std::string& path, const std::vector<VariantFileEntry>& entries);

std::vector<PredictionRecord> read_predictions_jsonl(const std::string& path);
void write_predictions_jsonl(const std::string& path, const std::vector<PredictionRecord>& recs);

std::vector<RankedPrediction> read_ranked_jsonl(const std::string& path);
void write_ranked_jsonl(const std::string& path, const std::vector<RankedPrediction>& ranked);

void write_prompts_jsonl(const std::string& path, const std::vector<PromptInstance>& prompts);

// Whole-file JSON (not JSONL) with a trailing newline.
void write_json_file(const std::string& path, const ordered_json& value);
ordered_json read_json_file(const std::string& path);

// Shell-free glob: `*` within the final path component only.
std::vector<std::string> expand_glob(const std::string& pattern);

}  // namespace lacuna
