#include "lacuna/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <map>

#include "lacuna/errors.hpp"
#include "lacuna/jsonl.hpp"
#include "lacuna/ngram.hpp"
#include "lacuna/runner.hpp"
#include "lacuna/version.hpp"

namespace lacuna {

namespace fs = std::filesystem;

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& config_path,
                            const std::string& command_line) {
    RunManifest manifest;
    manifest.command = command_line;
    manifest.tool_version = kVersion;
    manifest.started_at = iso8601_utc_now();
    if (!config_path.empty()) manifest.config_digest = sha256_file(config_path);
    manifest.seeds = {{"split", cfg.split.seed},
                      {"masking", cfg.masking.seed},
                      {"sampling", cfg.sampling.seed}};
    manifest.input_digests[cfg.corpus_input] = sha256_file(cfg.corpus_input);

    fs::create_directories(cfg.output_dir);

    PipelineResult result;
    result.output_dir = cfg.output_dir;
    auto emit = [&](const std::string& name) {
        const std::string path = join_path(cfg.output_dir, name);
        const std::string digest = sha256_file(path);
        manifest.output_digests[path] = digest;
        result.artifact_digests[name] = digest;
    };

    // Ingest.
    const auto rows = read_token_tsv_file(cfg.corpus_input);
    const Corpus corpus = ingest_tokens(rows);
    write_documents_jsonl(join_path(cfg.output_dir, "corpus.jsonl"), corpus);
    emit("corpus.jsonl");

    // Split.
    const auto [train, dev] = split_dev(corpus, cfg.split);
    write_documents_jsonl(join_path(cfg.output_dir, "train.jsonl"), train);
    write_documents_jsonl(join_path(cfg.output_dir, "dev.jsonl"), dev);
    emit("train.jsonl");
    emit("dev.jsonl");
    if (dev.empty()) {
        throw ConfigError("pipeline: dev split is empty; lower corpus.min_dev_words or raise "
                          "corpus.dev_fraction");
    }

    // Mask.
    const auto variants = mask_corpus(dev, cfg.masking, cfg.mode);
    std::vector<VariantFileEntry> variant_entries;
    variant_entries.reserve(variants.size());
    {
        std::map<std::string, const Document*> dev_docs;
        for (const auto& doc : dev) dev_docs[doc.doc_id] = &doc;
        for (const auto& variant : variants) {
            VariantFileEntry entry;
            entry.variant = variant;
            entry.masked_text = render_masked(*dev_docs.at(variant.doc_id), variant.positions,
                                              cfg.masking.mask_placeholder);
            variant_entries.push_back(std::move(entry));
        }
    }
    write_variants_jsonl(join_path(cfg.output_dir, "variants.jsonl"), variant_entries);
    emit("variants.jsonl");

    // Train the local model.
    NgramConfig ngram_cfg = cfg.ngram;
    ngram_cfg.tokenizer.mask_placeholder = cfg.masking.mask_placeholder;
    ngram_cfg.tokenizer.unk_placeholder = cfg.masking.unk_placeholder;
    NgramModel model = NgramModel::train(train, ngram_cfg);
    model.save(join_path(cfg.output_dir, "ngram.model"));
    emit("ngram.model");
    NgramBackend backend(std::move(model), cfg.system_id);

    // Predict, one run per method.
    const auto inputs = build_variant_inputs(dev, variants, cfg.masking.mask_placeholder);
    std::vector<std::vector<PredictionRecord>> runs;
    for (const Method method : cfg.methods) {
        RunOptions opts;
        opts.method = method;
        opts.params = cfg.sampling;
        opts.system_id = cfg.system_id;
        opts.placeholders = {cfg.masking.mask_placeholder, cfg.masking.unk_placeholder};
        opts.ban_mask_token = cfg.ban_mask_token;
        opts.mode = cfg.mode;
        RunResult run = run_predictions(inputs, &backend, &backend, opts);
        result.failures += run.failures;
        manifest.failure_counts[method_name(method)] = run.failures;

        const std::string name = "predictions_" + method_name(method) + ".jsonl";
        write_predictions_jsonl(join_path(cfg.output_dir, name), run.records);
        emit(name);
        runs.push_back(std::move(run.records));
    }

    // Ensemble across the method runs.
    const auto ranked = majority_vote(runs, cfg.vote);
    write_ranked_jsonl(join_path(cfg.output_dir, "ensemble.jsonl"), ranked);
    emit("ensemble.jsonl");

    // Evaluate.
    ordered_json report_json;
    std::vector<ResultCell> cells;
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
        const EvalReport report = score_accuracy(runs[i], variants, cfg.eval_top_n);
        const std::string name = method_name(cfg.methods[i]);
        report_json["methods"][name] = to_json(report);
        result.method_accuracy[name] = report.overall.accuracy;
        cells.push_back({cfg.system_id, cfg.methods[i], report.overall.accuracy});
    }
    result.ensemble_top1 = topk_accuracy(ranked, variants, 1);
    result.ensemble_topk = topk_accuracy(ranked, variants, cfg.vote.top_k);
    report_json["ensemble"] = {{"top1", result.ensemble_top1},
                               {"topk", result.ensemble_topk},
                               {"k", cfg.vote.top_k}};

    const EvalReport baseline = most_common_word_baseline(train, variants, cfg.eval_top_n);
    result.baseline_accuracy = baseline.overall.accuracy;
    report_json["baseline"] = to_json(baseline);

    write_json_file(join_path(cfg.output_dir, "report.json"), report_json);
    emit("report.json");

    const std::string table = render_results_table(cells, result.ensemble_top1,
                                                   result.ensemble_topk,
                                                   result.baseline_accuracy);
    {
        std::ofstream out(join_path(cfg.output_dir, "report.txt"), std::ios::binary);
        if (!out) throw ConfigError("cannot open output file: " +
                                    join_path(cfg.output_dir, "report.txt"));
        out << table;
    }
    emit("report.txt");

    manifest.finished_at = iso8601_utc_now();
    write_manifest(join_path(cfg.output_dir, "manifest.json"), manifest);
    return result;
}

}  // namespace lacuna
