#include "lacuna/jsonl.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lacuna/errors.hpp"

namespace lacuna {

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open input file: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file: " + path);
    return out;
}

ordered_json parse_line(const std::string& line, const std::string& path, std::size_t line_no) {
    try {
        return ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw IngestError(path + ":" + std::to_string(line_no) + ": bad JSON: " + e.what());
    }
}

template <typename T, typename FromJson>
std::vector<T> read_jsonl(const std::string& path, FromJson&& from_json) {
    auto in = open_input(path);
    std::vector<T> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            values.push_back(from_json(parse_line(line, path, line_no)));
        } catch (const nlohmann::json::exception& e) {
            throw IngestError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return values;
}

template <typename T, typename ToJson>
void write_jsonl(const std::string& path, const std::vector<T>& values, ToJson&& to_json_fn) {
    auto out = open_output(path);
    for (const auto& value : values) {
        out << to_json_fn(value).dump() << "\n";
    }
    if (!out) throw ConfigError("failed writing " + path);
}

}  // namespace

ordered_json to_json(const Document& doc) {
    return ordered_json{{"doc_id", doc.doc_id},
                        {"language", doc.language},
                        {"words", doc.words},
                        {"line_starts", doc.line_starts}};
}

ordered_json to_json(const MaskedVariant& variant, const std::string& masked_text) {
    return ordered_json{{"doc_id", variant.doc_id},     {"variant_id", variant.variant_id},
                        {"positions", variant.positions}, {"gold", variant.gold},
                        {"language", variant.language},   {"masked_text", masked_text}};
}

ordered_json to_json(const PredictionRecord& rec) {
    return ordered_json{{"system_id", rec.system_id},   {"method", method_name(rec.method)},
                        {"doc_id", rec.doc_id},         {"variant_id", rec.variant_id},
                        {"position", rec.position},     {"predicted", rec.predicted}};
}

ordered_json to_json(const RankedPrediction& rp) {
    ordered_json ranked = ordered_json::array();
    for (const auto& [word, count] : rp.ranked) {
        ranked.push_back(ordered_json{{"word", word}, {"votes", count}});
    }
    return ordered_json{{"doc_id", rp.doc_id},
                        {"variant_id", rp.variant_id},
                        {"position", rp.position},
                        {"ranked", std::move(ranked)}};
}

ordered_json to_json(const PromptInstance& prompt) {
    ordered_json j{{"method", method_name(prompt.method)},
                   {"doc_id", prompt.doc_id},
                   {"variant_id", prompt.variant_id}};
    if (prompt.target_position) {
        j["target_position"] = *prompt.target_position;
    }
    j["text"] = prompt.text;
    return j;
}

ordered_json to_json(const FrequencyTable& table) {
    ordered_json top = ordered_json::array();
    for (const auto& entry : table.top) {
        top.push_back(ordered_json{
            {"word", entry.word}, {"count", entry.count}, {"frequency", entry.frequency}});
    }
    return ordered_json{{"unique", table.unique}, {"total", table.total}, {"top", std::move(top)}};
}

ordered_json to_json(const EvalBreakdown& breakdown) {
    return ordered_json{{"n_positions", breakdown.n_positions},
                        {"n_correct", breakdown.n_correct},
                        {"accuracy", breakdown.accuracy},
                        {"predicted", to_json(breakdown.predicted)},
                        {"reference", to_json(breakdown.reference)}};
}

ordered_json to_json(const EvalReport& report) {
    ordered_json per_language = ordered_json::object();
    for (const auto& [language, breakdown] : report.per_language) {
        per_language[language] = to_json(breakdown);
    }
    ordered_json j{{"overall", to_json(report.overall)},
                   {"per_language", std::move(per_language)}};
    if (report.topk_accuracy) {
        j["topk_accuracy"] = *report.topk_accuracy;
        j["topk_k"] = report.topk_k ? *report.topk_k : 0;
    }
    return j;
}

Document document_from_json(const ordered_json& j) {
    Document doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.language = j.at("language").get<std::string>();
    doc.words = j.at("words").get<std::vector<std::string>>();
    doc.line_starts = j.at("line_starts").get<std::vector<std::size_t>>();
    return doc;
}

MaskedVariant variant_from_json(const ordered_json& j, std::string* masked_text) {
    MaskedVariant variant;
    variant.doc_id = j.at("doc_id").get<std::string>();
    variant.variant_id = j.at("variant_id").get<std::uint32_t>();
    variant.positions = j.at("positions").get<std::vector<std::size_t>>();
    variant.gold = j.at("gold").get<std::vector<std::string>>();
    variant.language = j.at("language").get<std::string>();
    if (masked_text != nullptr) {
        *masked_text = j.value("masked_text", std::string());
    }
    return variant;
}

PredictionRecord prediction_from_json(const ordered_json& j) {
    PredictionRecord rec;
    rec.system_id = j.at("system_id").get<std::string>();
    rec.method = method_from_name(j.at("method").get<std::string>());
    rec.doc_id = j.at("doc_id").get<std::string>();
    rec.variant_id = j.at("variant_id").get<std::uint32_t>();
    rec.position = j.at("position").get<std::size_t>();
    rec.predicted = j.at("predicted").get<std::string>();
    return rec;
}

RankedPrediction ranked_from_json(const ordered_json& j) {
    RankedPrediction rp;
    rp.doc_id = j.at("doc_id").get<std::string>();
    rp.variant_id = j.at("variant_id").get<std::uint32_t>();
    rp.position = j.at("position").get<std::size_t>();
    for (const auto& item : j.at("ranked")) {
        rp.ranked.emplace_back(item.at("word").get<std::string>(),
                               item.at("votes").get<std::size_t>());
    }
    return rp;
}

std::vector<Document> read_documents_jsonl(const std::string& path) {
    return read_jsonl<Document>(path, [](const ordered_json& j) { return document_from_json(j); });
}

void write_documents_jsonl(const std::string& path, const std::vector<Document>& docs) {
    write_jsonl(path, docs, [](const Document& d) { return to_json(d); });
}

std::vector<VariantFileEntry> read_variants_jsonl(const std::string& path) {
    return read_jsonl<VariantFileEntry>(path, [](const ordered_json& j) {
        VariantFileEntry entry;
        entry.variant = variant_from_json(j, &entry.masked_text);
        return entry;
    });
}

void write_variants_jsonl(const std::string& path, const std::vector<VariantFileEntry>& entries) {
    write_jsonl(path, entries, [](const VariantFileEntry& e) {
        return to_json(e.variant, e.masked_text);
    });
}

std::vector<PredictionRecord> read_predictions_jsonl(const std::string& path) {
    return read_jsonl<PredictionRecord>(
        path, [](const ordered_json& j) { return prediction_from_json(j); });
}

void write_predictions_jsonl(const std::string& path, const std::vector<PredictionRecord>& recs) {
    write_jsonl(path, recs, [](const PredictionRecord& r) { return to_json(r); });
}

std::vector<RankedPrediction> read_ranked_jsonl(const std::string& path) {
    return read_jsonl<RankedPrediction>(path,
                                        [](const ordered_json& j) { return ranked_from_json(j); });
}

void write_ranked_jsonl(const std::string& path, const std::vector<RankedPrediction>& ranked) {
    write_jsonl(path, ranked, [](const RankedPrediction& r) { return to_json(r); });
}

void write_prompts_jsonl(const std::string& path, const std::vector<PromptInstance>& prompts) {
    write_jsonl(path, prompts, [](const PromptInstance& p) { return to_json(p); });
}

void write_json_file(const std::string& path, const ordered_json& value) {
    auto out = open_output(path);
    out << value.dump(2) << "\n";
    if (!out) throw ConfigError("failed writing " + path);
}

ordered_json read_json_file(const std::string& path) {
    auto in = open_input(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return ordered_json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": bad JSON: " + e.what());
    }
}

std::vector<std::string> expand_glob(const std::string& pattern) {
    namespace fs = std::filesystem;
    const fs::path p(pattern);
    const std::string name = p.filename().string();
    if (name.find('*') == std::string::npos) {
        return {pattern};
    }

    const fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
    const std::size_t star = name.find('*');
    const std::string prefix = name.substr(0, star);
    const std::string suffix = name.substr(star + 1);

    std::vector<std::string> matches;
    if (!fs::is_directory(dir)) return matches;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string fname = entry.path().filename().string();
        if (fname.size() < prefix.size() + suffix.size()) continue;
        if (fname.compare(0, prefix.size(), prefix) != 0) continue;
        if (fname.compare(fname.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
        matches.push_back((p.parent_path() / fname).string());
    }
    std::sort(matches.begin(), matches.end());
    return matches;
}

}  // namespace lacuna
