// Command-line front end: each subcommand wraps one pipeline stage, and
// `run` executes all of them from a single config file. Exit codes:
// 0 success, 1 runtime failure, 2 usage or config error.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lacuna/config.hpp"
#include "lacuna/corpus.hpp"
#include "lacuna/decode.hpp"
#include "lacuna/ensemble.hpp"
#include "lacuna/errors.hpp"
#include "lacuna/eval.hpp"
#include "lacuna/jsonl.hpp"
#include "lacuna/manifest.hpp"
#include "lacuna/masking.hpp"
#include "lacuna/ngram.hpp"
#include "lacuna/pipeline.hpp"
#include "lacuna/remote.hpp"
#include "lacuna/runner.hpp"
#include "lacuna/version.hpp"

namespace {

using namespace lacuna;

std::string command_string(int argc, char** argv) {
    std::string cmd;
    for (int i = 0; i < argc; ++i) {
        if (i > 0) cmd += ' ';
        cmd += argv[i];
    }
    return cmd;
}

// Stage manifest written next to the stage's primary output.
struct StageManifest {
    RunManifest manifest;

    explicit StageManifest(const std::string& command) {
        manifest.command = command;
        manifest.tool_version = kVersion;
        manifest.started_at = iso8601_utc_now();
    }

    void input(const std::string& path) { manifest.input_digests[path] = sha256_file(path); }
    void output(const std::string& path) { manifest.output_digests[path] = sha256_file(path); }
    void seed(const std::string& name, std::uint64_t value) { manifest.seeds[name] = value; }

    void write(const std::string& primary_output) {
        manifest.finished_at = iso8601_utc_now();
        write_manifest(primary_output + ".manifest.json", manifest);
    }
};

struct PredictArgs {
    std::string method = "all";
    std::string backend;
    std::string variants_path;
    std::string system_id;
    std::string output;
    std::string prompts_output;
    std::string mode = "parallel";
    double temperature = 0.2;
    std::size_t max_new_tokens = 64;
    std::uint64_t seed = 0;
    bool reproduce_mask_bug = false;
    std::string mask_placeholder = "[MASK]";
    std::string unk_placeholder = "[UNK]";
};

int run_predict(const PredictArgs& args, const std::string& command) {
    const Method method = method_from_name(args.method);

    std::unique_ptr<NgramBackend> ngram;
    std::unique_ptr<RemoteBackend> remote;
    TextBackend* text = nullptr;
    const ScoredBackend* scored = nullptr;
    std::string backend_digest;

    if (args.backend.rfind("ngram:", 0) == 0) {
        const std::string path = args.backend.substr(6);
        backend_digest = sha256_file(path);
        ngram = std::make_unique<NgramBackend>(NgramModel::load(path),
                                               args.system_id.empty() ? "ngram" : args.system_id);
        text = ngram.get();
        scored = ngram.get();
    } else if (args.backend.rfind("remote:", 0) == 0) {
        const std::string path = args.backend.substr(7);
        backend_digest = sha256_file(path);
        remote = std::make_unique<RemoteBackend>(RemoteBackendConfig::from_json_file(path));
        text = remote.get();
    } else {
        throw ConfigError("--backend must be ngram:<model-file> or remote:<config-json>");
    }

    const auto entries = read_variants_jsonl(args.variants_path);
    std::vector<VariantInput> inputs;
    inputs.reserve(entries.size());
    for (const auto& entry : entries) {
        inputs.push_back(
            variant_input_from_text(entry.variant, entry.masked_text, args.mask_placeholder));
    }

    RunOptions opts;
    opts.method = method;
    opts.params.temperature = args.temperature;
    opts.params.max_new_tokens = args.max_new_tokens;
    opts.params.seed = args.seed;
    opts.system_id = args.system_id;
    opts.placeholders = {args.mask_placeholder, args.unk_placeholder};
    opts.ban_mask_token = !args.reproduce_mask_bug;
    opts.mode = execution_mode_from_name(args.mode);

    if (!args.prompts_output.empty()) {
        std::vector<PromptInstance> prompts;
        for (const auto& input : inputs) {
            switch (method) {
                case Method::All:
                    prompts.push_back(build_prompt_all(input.words, input.variant));
                    break;
                case Method::OneByOne: {
                    auto per_position =
                        build_prompts_one_by_one(input.words, input.variant, opts.placeholders);
                    prompts.insert(prompts.end(), per_position.begin(), per_position.end());
                    break;
                }
                case Method::Restore:
                    prompts.push_back(build_prompt_restore(input.words, input.variant));
                    break;
            }
        }
        write_prompts_jsonl(args.prompts_output, prompts);
    }

    const RunResult run = run_predictions(inputs, text, scored, opts);
    write_predictions_jsonl(args.output, run.records);

    StageManifest stage(command);
    stage.input(args.variants_path);
    stage.seed("sampling", args.seed);
    stage.manifest.config_digest = backend_digest;
    stage.manifest.failure_counts[method_name(method)] = run.failures;
    stage.output(args.output);
    stage.write(args.output);

    std::fprintf(stderr, "predict: %zu records, %zu failed backend call(s)\n", run.records.size(),
                 run.failures);
    return 0;
}

struct EvaluateArgs {
    std::string predictions_glob;
    std::string variants_path;
    std::string train_corpus;
    std::string ranked_path;
    std::string report_path;
    std::size_t top_k = 3;
    std::size_t top_n = 20;
};

int run_evaluate(const EvaluateArgs& args) {
    const auto entries = read_variants_jsonl(args.variants_path);
    std::vector<MaskedVariant> variants;
    variants.reserve(entries.size());
    for (const auto& entry : entries) variants.push_back(entry.variant);

    const auto files = expand_glob(args.predictions_glob);
    if (files.empty()) {
        throw ConfigError("no prediction files match: " + args.predictions_glob);
    }

    ordered_json report_json;
    std::vector<ResultCell> cells;
    for (const auto& file : files) {
        const auto records = read_predictions_jsonl(file);
        if (records.empty()) throw EvalError("no predictions in " + file);
        const EvalReport report = score_accuracy(records, variants, args.top_n);
        const std::string system_id = records.front().system_id;
        const std::string method = method_name(records.front().method);
        report_json["runs"].push_back(ordered_json{{"file", file},
                                                   {"system_id", system_id},
                                                   {"method", method},
                                                   {"report", to_json(report)}});
        cells.push_back({system_id, records.front().method, report.overall.accuracy});
    }

    std::optional<double> ensemble_top1;
    std::optional<double> ensemble_topk;
    if (!args.ranked_path.empty()) {
        const auto ranked = read_ranked_jsonl(args.ranked_path);
        ensemble_top1 = topk_accuracy(ranked, variants, 1);
        ensemble_topk = topk_accuracy(ranked, variants, args.top_k);
        report_json["ensemble"] = {
            {"top1", *ensemble_top1}, {"topk", *ensemble_topk}, {"k", args.top_k}};
    }

    std::optional<double> baseline_accuracy;
    if (!args.train_corpus.empty()) {
        const Corpus train = read_documents_jsonl(args.train_corpus);
        const EvalReport baseline = most_common_word_baseline(train, variants, args.top_n);
        baseline_accuracy = baseline.overall.accuracy;
        report_json["baseline"] = to_json(baseline);
    }

    const std::string table =
        render_results_table(cells, ensemble_top1, ensemble_topk, baseline_accuracy);
    std::fputs(table.c_str(), stdout);

    if (!args.report_path.empty()) write_json_file(args.report_path, report_json);
    return 0;
}

struct EnsembleArgs {
    std::string runs_glob;
    std::string output;
    std::string variants_path;
    std::size_t top_k = 3;
    std::size_t min_systems = 1;
    std::size_t select_best = 60;
};

int run_ensemble(const EnsembleArgs& args) {
    const auto files = expand_glob(args.runs_glob);
    if (files.empty()) throw ConfigError("no run files match: " + args.runs_glob);

    std::vector<std::vector<PredictionRecord>> runs;
    runs.reserve(files.size());
    for (const auto& file : files) runs.push_back(read_predictions_jsonl(file));

    // With dev variants available, keep only the best-scoring runs, the way
    // the per-checkpoint systems were pruned before voting.
    if (!args.variants_path.empty() && args.select_best > 0 && args.select_best < runs.size()) {
        const auto entries = read_variants_jsonl(args.variants_path);
        std::vector<MaskedVariant> variants;
        variants.reserve(entries.size());
        for (const auto& entry : entries) variants.push_back(entry.variant);

        std::vector<std::pair<double, std::size_t>> scored;
        scored.reserve(runs.size());
        for (std::size_t i = 0; i < runs.size(); ++i) {
            scored.emplace_back(score_accuracy(runs[i], variants).overall.accuracy, i);
        }
        std::stable_sort(scored.begin(), scored.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        scored.resize(args.select_best);
        std::sort(scored.begin(), scored.end(),
                  [](const auto& a, const auto& b) { return a.second < b.second; });

        std::vector<std::vector<PredictionRecord>> kept;
        kept.reserve(scored.size());
        for (const auto& [accuracy, index] : scored) kept.push_back(std::move(runs[index]));
        runs = std::move(kept);
    }

    VoteConfig cfg;
    cfg.top_k = args.top_k;
    cfg.min_systems = args.min_systems;
    const auto ranked = majority_vote(runs, cfg);
    write_ranked_jsonl(args.output, ranked);
    std::fprintf(stderr, "ensemble: %zu run(s), %zu key(s)\n", runs.size(), ranked.size());
    return 0;
}

int dispatch(int argc, char** argv) {
    const std::string command = command_string(argc, argv);

    CLI::App app{"Masked-token restoration pipeline"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Convert a token TSV into a document JSONL");
    std::string ingest_input, ingest_output;
    ingest->add_option("--input", ingest_input, "Token TSV file")->required();
    ingest->add_option("--output", ingest_output, "Document JSONL to write")->required();

    // split
    auto* split = app.add_subcommand("split", "Split documents into train and dev sets");
    std::string split_corpus, split_train_out, split_dev_out;
    double split_fraction = 0.01;
    std::uint64_t split_seed = 0;
    std::size_t split_min_words = 2;
    split->add_option("--corpus", split_corpus, "Document JSONL")->required();
    split->add_option("--dev-fraction", split_fraction, "Fraction of documents for dev");
    split->add_option("--seed", split_seed, "Shuffle seed");
    split->add_option("--min-dev-words", split_min_words, "Minimum words for a dev document");
    split->add_option("--train-output", split_train_out, "Train JSONL to write")->required();
    split->add_option("--dev-output", split_dev_out, "Dev JSONL to write")->required();

    // mask
    auto* mask = app.add_subcommand("mask", "Generate masked variants per document");
    std::string mask_corpus_path, mask_output;
    double mask_rate = 0.15;
    std::size_t mask_max_variants = 15;
    std::uint64_t mask_seed = 0;
    std::string mask_mode = "parallel";
    mask->add_option("--corpus", mask_corpus_path, "Document JSONL")->required();
    mask->add_option("--rate", mask_rate, "Fraction of words to mask");
    mask->add_option("--max-variants", mask_max_variants, "Unique variants per document");
    mask->add_option("--seed", mask_seed, "Masking seed");
    mask->add_option("--mode", mask_mode, "serial|parallel");
    mask->add_option("--output", mask_output, "Variant JSONL to write")->required();

    // train-ngram
    auto* train = app.add_subcommand("train-ngram", "Train the local n-gram model");
    std::string train_corpus_path, train_output;
    std::uint32_t train_order = 3;
    double train_kappa = 0.01, train_backoff = 0.4;
    std::size_t train_chunk_len = 3;
    train->add_option("--corpus", train_corpus_path, "Document JSONL")->required();
    train->add_option("--order", train_order, "Model order (n)");
    train->add_option("--kappa", train_kappa, "Add-k smoothing constant");
    train->add_option("--backoff", train_backoff, "Stupid-backoff factor");
    train->add_option("--chunk-len", train_chunk_len, "Subword chunk length in bytes");
    train->add_option("--output", train_output, "Model file to write")->required();

    // predict
    auto* predict = app.add_subcommand("predict", "Run one prediction method over variants");
    PredictArgs predict_args;
    predict->add_option("--method", predict_args.method, "all|one-by-one|restore")->required();
    predict->add_option("--backend", predict_args.backend,
                        "ngram:<model-file> or remote:<config-json>")
        ->required();
    predict->add_option("--variants", predict_args.variants_path, "Variant JSONL")->required();
    predict->add_option("--system-id", predict_args.system_id, "Label for this system")
        ->required();
    predict->add_option("--output", predict_args.output, "Prediction JSONL to write")->required();
    predict->add_option("--prompts-output", predict_args.prompts_output,
                        "Optional prompt audit JSONL");
    predict->add_option("--temperature", predict_args.temperature, "Sampling temperature");
    predict->add_option("--max-new-tokens", predict_args.max_new_tokens,
                        "Generation budget per call");
    predict->add_option("--seed", predict_args.seed, "Base sampling seed");
    predict->add_option("--mode", predict_args.mode, "serial|parallel");
    predict->add_flag("--reproduce-mask-bug", predict_args.reproduce_mask_bug,
                      "Allow the mask placeholder as a restore prediction");

    // ensemble
    auto* ensemble = app.add_subcommand("ensemble", "Majority-vote prediction runs");
    EnsembleArgs ensemble_args;
    ensemble->add_option("--runs", ensemble_args.runs_glob, "Prediction JSONL glob")->required();
    ensemble->add_option("--top-k", ensemble_args.top_k, "Ranked list depth");
    ensemble->add_option("--min-systems", ensemble_args.min_systems, "Minimum number of runs");
    ensemble->add_option("--variants", ensemble_args.variants_path,
                         "Variant JSONL for best-run selection");
    ensemble->add_option("--select-best", ensemble_args.select_best,
                         "Keep only the N best-scoring runs (needs --variants; 0 keeps all)");
    ensemble->add_option("--output", ensemble_args.output, "Ranked JSONL to write")->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score prediction runs against gold");
    EvaluateArgs evaluate_args;
    evaluate->add_option("--predictions", evaluate_args.predictions_glob,
                         "Prediction JSONL or glob")
        ->required();
    evaluate->add_option("--variants", evaluate_args.variants_path, "Variant JSONL")->required();
    evaluate->add_option("--train-corpus", evaluate_args.train_corpus,
                         "Train JSONL for the most-common-word baseline");
    evaluate->add_option("--ranked", evaluate_args.ranked_path, "Ranked JSONL from ensemble");
    evaluate->add_option("--top-k", evaluate_args.top_k, "k for ranked scoring");
    evaluate->add_option("--top-n", evaluate_args.top_n, "Frequency table size");
    evaluate->add_option("--report", evaluate_args.report_path, "Report JSON to write");

    // report-frequencies
    auto* freqs = app.add_subcommand("report-frequencies",
                                     "Word frequency table over predictions");
    std::string freqs_predictions, freqs_csv;
    std::size_t freqs_top = 20;
    freqs->add_option("--predictions", freqs_predictions, "Prediction JSONL")->required();
    freqs->add_option("--top", freqs_top, "Table size");
    freqs->add_option("--csv", freqs_csv, "CSV file to write")->required();

    // run
    auto* run = app.add_subcommand("run", "Execute the full pipeline from a config file");
    std::string run_config, run_output_dir;
    run->add_option("--config", run_config, "Pipeline config file")->required();
    run->add_option("--output-dir", run_output_dir, "Override [output] dir from the config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the usage error
        return code == 0 ? 0 : 2;
    }

    if (*ingest) {
        const auto rows = read_token_tsv_file(ingest_input);
        const Corpus corpus = ingest_tokens(rows);
        write_documents_jsonl(ingest_output, corpus);
        StageManifest stage(command);
        stage.input(ingest_input);
        stage.output(ingest_output);
        stage.write(ingest_output);
        std::fprintf(stderr, "ingest: %zu document(s)\n", corpus.size());
        return 0;
    }

    if (*split) {
        const Corpus corpus = read_documents_jsonl(split_corpus);
        SplitConfig cfg;
        cfg.dev_fraction = split_fraction;
        cfg.seed = split_seed;
        cfg.min_doc_words_dev = split_min_words;
        const auto [train_set, dev_set] = split_dev(corpus, cfg);
        write_documents_jsonl(split_train_out, train_set);
        write_documents_jsonl(split_dev_out, dev_set);
        StageManifest stage(command);
        stage.input(split_corpus);
        stage.seed("split", split_seed);
        stage.output(split_train_out);
        stage.output(split_dev_out);
        stage.write(split_dev_out);
        std::fprintf(stderr, "split: %zu train, %zu dev\n", train_set.size(), dev_set.size());
        return 0;
    }

    if (*mask) {
        const Corpus corpus = read_documents_jsonl(mask_corpus_path);
        MaskingConfig cfg;
        cfg.mask_rate = mask_rate;
        cfg.max_variants = mask_max_variants;
        cfg.seed = mask_seed;
        const auto variants = mask_corpus(corpus, cfg, execution_mode_from_name(mask_mode));

        std::map<std::string, const Document*> by_id;
        for (const auto& doc : corpus) by_id[doc.doc_id] = &doc;
        std::vector<VariantFileEntry> entries;
        entries.reserve(variants.size());
        for (const auto& variant : variants) {
            entries.push_back({variant, render_masked(*by_id.at(variant.doc_id),
                                                      variant.positions, cfg.mask_placeholder)});
        }
        write_variants_jsonl(mask_output, entries);
        StageManifest stage(command);
        stage.input(mask_corpus_path);
        stage.seed("masking", mask_seed);
        stage.output(mask_output);
        stage.write(mask_output);
        std::fprintf(stderr, "mask: %zu variant(s) over %zu document(s)\n", variants.size(),
                     corpus.size());
        return 0;
    }

    if (*train) {
        const Corpus corpus = read_documents_jsonl(train_corpus_path);
        NgramConfig cfg;
        cfg.order = train_order;
        cfg.kappa = train_kappa;
        cfg.backoff = train_backoff;
        cfg.tokenizer.chunk_len = train_chunk_len;
        const NgramModel model = NgramModel::train(corpus, cfg);
        model.save(train_output);
        StageManifest stage(command);
        stage.input(train_corpus_path);
        stage.output(train_output);
        stage.write(train_output);
        std::fprintf(stderr, "train-ngram: order %u, vocabulary %u\n", model.order(),
                     model.vocab().size());
        return 0;
    }

    if (*predict) return run_predict(predict_args, command);
    if (*ensemble) return run_ensemble(ensemble_args);
    if (*evaluate) return run_evaluate(evaluate_args);

    if (*freqs) {
        const auto records = read_predictions_jsonl(freqs_predictions);
        std::vector<std::string> words;
        words.reserve(records.size());
        for (const auto& rec : records) {
            if (!rec.predicted.empty()) words.push_back(rec.predicted);
        }
        const FrequencyTable table = frequency_report(words, freqs_top);
        std::ofstream out(freqs_csv, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open output file: " + freqs_csv);
        out << render_frequency_csv(table);
        std::fprintf(stderr, "report-frequencies: %zu unique word(s) over %llu prediction(s)\n",
                     table.unique, static_cast<unsigned long long>(table.total));
        return 0;
    }

    if (*run) {
        const ConfigMap map = ConfigMap::parse_file(run_config);
        PipelineConfig cfg = pipeline_config_from(map);
        if (!run_output_dir.empty()) cfg.output_dir = run_output_dir;
        const PipelineResult result = run_pipeline(cfg, run_config, command);
        for (const auto& [method, accuracy] : result.method_accuracy) {
            std::fprintf(stderr, "run: %-12s accuracy %.4f\n", method.c_str(), accuracy);
        }
        std::fprintf(stderr, "run: ensemble top-1 %.4f, baseline %.4f, artifacts in %s\n",
                     result.ensemble_top1, result.baseline_accuracy, result.output_dir.c_str());
        return 0;
    }

    return 2;  // unreachable: require_subcommand(1)
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
