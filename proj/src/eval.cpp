#include "lacuna/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "lacuna/errors.hpp"
#include "lacuna/prompts.hpp"

namespace lacuna {

namespace {

using Key = std::tuple<std::string, std::uint32_t, std::size_t>;

struct GoldEntry {
    std::string word;
    std::string language;
};

std::string key_string(const Key& key) {
    return "(" + std::get<0>(key) + ", " + std::to_string(std::get<1>(key)) + ", " +
           std::to_string(std::get<2>(key)) + ")";
}

std::map<Key, GoldEntry> gold_index(const std::vector<MaskedVariant>& gold) {
    std::map<Key, GoldEntry> index;
    for (const auto& variant : gold) {
        for (std::size_t i = 0; i < variant.positions.size(); ++i) {
            const Key key{variant.doc_id, variant.variant_id, variant.positions[i]};
            if (!index.emplace(key, GoldEntry{variant.gold[i], variant.language}).second) {
                throw EvalError("gold variants mask the same position twice: " + key_string(key));
            }
        }
    }
    return index;
}

std::string format_accuracy(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << value;
    return out.str();
}

}  // namespace

FrequencyTable frequency_report(const std::vector<std::string>& words, std::size_t top_n) {
    FrequencyTable table;
    std::map<std::string, std::uint64_t> counts;
    for (const auto& w : words) ++counts[w];
    table.unique = counts.size();
    table.total = words.size();

    std::vector<FrequencyEntry> entries;
    entries.reserve(counts.size());
    for (const auto& [word, count] : counts) {
        entries.push_back({word, count, static_cast<double>(count) / table.total});
    }
    // counts ascending by word already; stable sort keeps ties lexicographic.
    std::stable_sort(entries.begin(), entries.end(),
                     [](const FrequencyEntry& a, const FrequencyEntry& b) {
                         return a.count > b.count;
                     });
    if (entries.size() > top_n) entries.resize(top_n);
    table.top = std::move(entries);
    return table;
}

EvalReport score_accuracy(const std::vector<PredictionRecord>& predictions,
                          const std::vector<MaskedVariant>& gold, std::size_t top_n) {
    const auto index = gold_index(gold);

    std::map<Key, std::string> predicted;
    for (const auto& rec : predictions) {
        const Key key{rec.doc_id, rec.variant_id, rec.position};
        if (!index.count(key)) {
            throw EvalError("score_accuracy: prediction for unknown key " + key_string(key));
        }
        if (!predicted.emplace(key, rec.predicted).second) {
            throw EvalError("score_accuracy: duplicate prediction for key " + key_string(key));
        }
    }

    EvalReport report;
    std::vector<std::string> all_predicted_words;
    std::vector<std::string> all_reference_words;
    std::map<std::string, std::vector<std::string>> lang_predicted;
    std::map<std::string, std::vector<std::string>> lang_reference;

    for (const auto& [key, entry] : index) {
        const auto it = predicted.find(key);
        const std::string word = it == predicted.end() ? std::string() : it->second;
        const bool correct = !word.empty() && word == entry.word;

        auto tally = [&](EvalBreakdown& b) {
            ++b.n_positions;
            if (correct) ++b.n_correct;
        };
        tally(report.overall);
        tally(report.per_language[entry.language]);

        if (!word.empty()) {
            all_predicted_words.push_back(word);
            lang_predicted[entry.language].push_back(word);
        }
        all_reference_words.push_back(entry.word);
        lang_reference[entry.language].push_back(entry.word);
    }

    auto finish = [&](EvalBreakdown& b, const std::vector<std::string>& preds,
                      const std::vector<std::string>& refs) {
        b.accuracy = b.n_positions == 0
                         ? 0.0
                         : static_cast<double>(b.n_correct) / static_cast<double>(b.n_positions);
        b.predicted = frequency_report(preds, top_n);
        b.reference = frequency_report(refs, top_n);
    };
    finish(report.overall, all_predicted_words, all_reference_words);
    for (auto& [language, breakdown] : report.per_language) {
        finish(breakdown, lang_predicted[language], lang_reference[language]);
    }
    return report;
}

double topk_accuracy(const std::vector<RankedPrediction>& ranked,
                     const std::vector<MaskedVariant>& gold, std::size_t k) {
    if (k == 0) throw ConfigError("topk_accuracy: k must be >= 1");
    const auto index = gold_index(gold);

    std::map<Key, const RankedPrediction*> by_key;
    for (const auto& rp : ranked) {
        const Key key{rp.doc_id, rp.variant_id, rp.position};
        if (!index.count(key)) {
            throw EvalError("topk_accuracy: ranked entry for unknown key " + key_string(key));
        }
        if (!by_key.emplace(key, &rp).second) {
            throw EvalError("topk_accuracy: duplicate ranked entry for key " + key_string(key));
        }
    }

    if (index.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& [key, entry] : index) {
        const auto it = by_key.find(key);
        if (it == by_key.end()) continue;
        const auto& list = it->second->ranked;
        const std::size_t depth = std::min(k, list.size());
        for (std::size_t i = 0; i < depth; ++i) {
            if (list[i].first == entry.word) {
                ++correct;
                break;
            }
        }
    }
    return static_cast<double>(correct) / static_cast<double>(index.size());
}

std::map<std::string, std::string> most_common_words(const Corpus& train) {
    const CorpusStats stats = corpus_stats(train);
    std::map<std::string, std::string> result;
    for (const auto& [language, lang_stats] : stats.per_language) {
        std::string best;
        std::uint64_t best_count = 0;
        // word_freq iterates lexicographically, so strict > keeps the
        // lexicographically first word among equal counts.
        for (const auto& [word, count] : lang_stats.word_freq) {
            if (count > best_count) {
                best = word;
                best_count = count;
            }
        }
        if (best_count > 0) result[language] = best;
    }
    return result;
}

std::vector<PredictionRecord> baseline_predictions(const Corpus& train,
                                                   const std::vector<MaskedVariant>& variants) {
    const auto baseline = most_common_words(train);

    std::set<std::string> missing;
    for (const auto& variant : variants) {
        if (!baseline.count(variant.language)) missing.insert(variant.language);
    }
    if (!missing.empty()) {
        std::string joined;
        for (const auto& language : missing) {
            if (!joined.empty()) joined += ", ";
            joined += language;
        }
        throw EvalError("most_common_word_baseline: language(s) absent from training data: " +
                        joined);
    }

    std::vector<PredictionRecord> predictions;
    for (const auto& variant : variants) {
        const std::string& word = baseline.at(variant.language);
        for (std::size_t position : variant.positions) {
            PredictionRecord rec;
            rec.system_id = "most-common-word";
            rec.method = Method::All;
            rec.doc_id = variant.doc_id;
            rec.variant_id = variant.variant_id;
            rec.position = position;
            rec.predicted = word;
            predictions.push_back(std::move(rec));
        }
    }
    return predictions;
}

EvalReport most_common_word_baseline(const Corpus& train,
                                     const std::vector<MaskedVariant>& variants,
                                     std::size_t top_n) {
    return score_accuracy(baseline_predictions(train, variants), variants, top_n);
}

std::string render_results_table(const std::vector<ResultCell>& cells,
                                 std::optional<double> ensemble_top1,
                                 std::optional<double> ensemble_topk,
                                 std::optional<double> baseline) {
    std::vector<std::string> systems;
    for (const auto& cell : cells) {
        if (std::find(systems.begin(), systems.end(), cell.system_id) == systems.end()) {
            systems.push_back(cell.system_id);
        }
    }

    const std::vector<Method> methods{Method::All, Method::OneByOne, Method::Restore};
    std::map<std::pair<std::string, int>, double> grid;
    std::set<int> methods_seen;
    for (const auto& cell : cells) {
        grid[{cell.system_id, static_cast<int>(cell.method)}] = cell.accuracy;
        methods_seen.insert(static_cast<int>(cell.method));
    }

    std::size_t label_width = std::string("Most common word").size();
    for (const Method m : methods) label_width = std::max(label_width, method_display_name(m).size());

    std::vector<std::size_t> widths;
    for (const auto& system : systems) widths.push_back(std::max<std::size_t>(system.size(), 5));

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(label_width)) << "";
    for (std::size_t c = 0; c < systems.size(); ++c) {
        out << "  " << std::right << std::setw(static_cast<int>(widths[c])) << systems[c];
    }
    out << "\n";

    for (const Method m : methods) {
        if (!methods_seen.count(static_cast<int>(m))) continue;
        out << std::left << std::setw(static_cast<int>(label_width)) << method_display_name(m);
        for (std::size_t c = 0; c < systems.size(); ++c) {
            const auto it = grid.find({systems[c], static_cast<int>(m)});
            out << "  " << std::right << std::setw(static_cast<int>(widths[c]))
                << (it == grid.end() ? std::string("-") : format_accuracy(it->second));
        }
        out << "\n";
    }

    std::size_t span = label_width;
    for (std::size_t w : widths) span += 2 + w;

    auto centered_row = [&](const std::string& label, const std::string& value) {
        std::string row = label;
        row.resize(label_width, ' ');
        const std::size_t room = span - label_width;
        const std::size_t pad = value.size() >= room ? 0 : (room - value.size()) / 2;
        row.append(pad, ' ');
        row += value;
        out << row << "\n";
    };

    if (ensemble_top1) {
        std::string value = format_accuracy(*ensemble_top1);
        if (ensemble_topk) value += " (" + format_accuracy(*ensemble_topk) + ")";
        centered_row("Majority voting", value);
    }
    if (baseline) centered_row("Most common word", format_accuracy(*baseline));
    return out.str();
}

std::string render_frequency_csv(const FrequencyTable& table) {
    std::ostringstream out;
    out << "word,count,frequency\n";
    for (const auto& entry : table.top) {
        std::string quoted = entry.word;
        bool needs_quotes = quoted.find_first_of(",\"\n") != std::string::npos;
        if (needs_quotes) {
            std::string escaped = "\"";
            for (char c : quoted) {
                if (c == '"') escaped += "\"\"";
                else escaped += c;
            }
            escaped += '"';
            quoted = std::move(escaped);
        }
        out << quoted << ',' << entry.count << ',' << std::setprecision(17) << entry.frequency
            << "\n";
    }
    return out.str();
}

}  // namespace lacuna
