// ============================================================================
// test_acceptance.cpp
// Acceptance harness for the lacuna masked-token-restoration pipeline
// ============================================================================
//
// Nine independent criteria, each printed as one [PASS]/[FAIL] line with its
// wall-clock time against the stated budget. Every criterion checks library
// behavior against an oracle computed in this file by different code: direct
// enumeration, brute-force recounting, exhaustive search, raw JSON parsing,
// or a scripted HTTP server. The process exit code is the number of failed
// criteria.
//
//   1. masking-law           variant-count law, distinct sets, round-trip
//   2. prompt-fidelity       golden template files, byte for byte
//   3. ngram-oracle          next_distribution vs brute-force recount
//   4. restore-decoding      greedy force-decode vs exhaustive word search
//   5. voting-oracle         majority vote vs brute-force tally
//   6. metric-identities     top-k/top-1, raw-JSONL rescoring, freq sums
//   7. baseline-oracle       planted-word baseline vs enumeration
//   8. end-to-end            deterministic `run`, restore beats baseline
//   9. remote-conformance    chat JSON shape, 429 retry, graceful failure
//
// RUN: ctest --test-dir build -R acceptance
//      (or invoke the binary directly; it takes no arguments)
// ============================================================================

#include <httplib.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "lacuna/corpus.hpp"
#include "lacuna/decode.hpp"
#include "lacuna/ensemble.hpp"
#include "lacuna/errors.hpp"
#include "lacuna/eval.hpp"
#include "lacuna/jsonl.hpp"
#include "lacuna/masking.hpp"
#include "lacuna/ngram.hpp"
#include "lacuna/prompts.hpp"
#include "lacuna/remote.hpp"
#include "lacuna/runner.hpp"
#include "lacuna/subword.hpp"

#ifndef LACUNA_GOLDEN_DIR
#error "LACUNA_GOLDEN_DIR must point at the golden prompt directory"
#endif
#ifndef LACUNA_CLI_PATH
#error "LACUNA_CLI_PATH must point at the built lacuna binary"
#endif
#ifndef LACUNA_REPO_DIR
#error "LACUNA_REPO_DIR must point at the repository root"
#endif

using namespace lacuna;

namespace {

// ============================================================================
// HARNESS
// ============================================================================

// Failure collector for one criterion. Passing checks are only counted;
// failing checks record a message (the first few are printed).
class Check {
public:
    void that(bool ok, const std::string& what) {
        ++total_;
        if (!ok) failures_.push_back(what);
    }
    template <typename T, typename U>
    void equal(const T& got, const U& want, const std::string& what) {
        ++total_;
        if (!(got == static_cast<T>(want))) {
            std::ostringstream msg;
            msg << what << ": got " << got << ", want " << want;
            failures_.push_back(msg.str());
        }
    }
    void close(double got, double want, double eps, const std::string& what) {
        ++total_;
        if (!(std::fabs(got - want) <= eps)) {
            std::ostringstream msg;
            msg << what << ": got " << std::setprecision(17) << got << ", want " << want
                << " (eps " << eps << ")";
            failures_.push_back(msg.str());
        }
    }
    std::size_t total() const { return total_; }
    const std::vector<std::string>& failures() const { return failures_; }

private:
    std::size_t total_ = 0;
    std::vector<std::string> failures_;
};

struct Criterion {
    std::string name;
    double budget_s;  // <= 0 means no wall-clock budget
    std::function<void(Check&)> body;
};

// Deterministic 64-bit mixer for synthetic data (splitmix64 finalizer).
std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a * 0x9e3779b97f4a7c15ULL + b + 0x7f4a7c159e3779b9ULL;
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<missing file: " + path + ">";
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::string> split_words(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> words;
    std::string word;
    while (in >> word) words.push_back(word);
    return words;
}

Document make_doc(std::string doc_id, std::vector<std::string> words,
                  std::string language = "Akkadian") {
    Document doc;
    doc.doc_id = std::move(doc_id);
    doc.language = std::move(language);
    doc.words = std::move(words);
    doc.line_starts = {0};
    return doc;
}

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("lacuna_accept_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// Runs a shell command, returns {exit code, combined output}.
std::pair<int, std::string> run_command(const std::string& command) {
    FILE* pipe = ::popen(command.c_str(), "r");
    if (!pipe) return {-1, "popen failed"};
    std::string output;
    char buffer[4096];
    while (std::size_t n = std::fread(buffer, 1, sizeof(buffer), pipe)) output.append(buffer, n);
    const int status = ::pclose(pipe);
    if (status == -1) return {-1, output};
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

// ============================================================================
// CRITERION 1: masking law over 1,000 random documents
//
// k = max(1, round-half-up(0.15 n)) recomputed in pure integers, variant
// counts checked against a saturating Pascal triangle, position sets checked
// pairwise distinct, and gold substitution checked to round-trip the text.
// ============================================================================

void criterion_masking_law(Check& check) {
    // C(n, k) with saturating addition; n up to 200.
    constexpr std::uint64_t kSat = 1'000'000;
    constexpr std::size_t kMaxN = 200;
    static std::uint64_t choose[kMaxN + 1][kMaxN + 1];
    for (std::size_t n = 0; n <= kMaxN; ++n) {
        choose[n][0] = 1;
        for (std::size_t k = 1; k <= n; ++k) {
            const std::uint64_t below = choose[n - 1][k - 1];
            const std::uint64_t same = (k <= n - 1) ? choose[n - 1][k] : 0;
            choose[n][k] = std::min(kSat, below + same);
        }
        for (std::size_t k = n + 1; k <= kMaxN; ++k) choose[n][k] = 0;
    }

    const std::vector<std::string> lexicon = {"ina",  "szarru", "e2",  "mat",   "ki",  "dumu",
                                              "lugal", "an",     "ki2", "nindas", "gal", "ur"};
    std::mt19937_64 rng(20250815);

    for (std::size_t d = 0; d < 1000; ++d) {
        // First 200 documents cover every length once; the rest are random.
        const std::size_t n =
            (d < kMaxN) ? d + 1 : std::uniform_int_distribution<std::size_t>(1, kMaxN)(rng);
        std::vector<std::string> words(n);
        for (std::size_t i = 0; i < n; ++i) words[i] = lexicon[rng() % lexicon.size()];
        const Document doc = make_doc("D" + std::to_string(d), words);

        MaskingConfig cfg;
        cfg.seed = d;
        const auto variants = generate_variants(doc, cfg);

        // Independent mask-count law: k = max(1, floor((15 n + 50) / 100)).
        const std::uint64_t k = std::max<std::uint64_t>(1, (15 * n + 50) / 100);
        const std::uint64_t want_count = std::min<std::uint64_t>(15, choose[n][k]);
        check.equal(variants.size(), want_count,
                    "variant count for n=" + std::to_string(n) + " seed=" + std::to_string(d));

        std::set<std::vector<std::size_t>> seen;
        for (const auto& v : variants) {
            check.that(v.positions.size() == k,
                       "positions per variant for n=" + std::to_string(n));
            bool in_range = true, increasing = true, gold_match = true;
            for (std::size_t j = 0; j < v.positions.size(); ++j) {
                if (v.positions[j] >= n) in_range = false;
                if (j > 0 && v.positions[j] <= v.positions[j - 1]) increasing = false;
                if (in_range && v.gold[j] != words[v.positions[j]]) gold_match = false;
            }
            check.that(in_range && increasing, "positions strictly increasing and in range");
            check.that(gold_match, "gold words copied from the document");
            seen.insert(v.positions);

            const auto masked = masked_words(words, v.positions, cfg.mask_placeholder);
            check.that(unmask_words(masked, v.positions, v.gold) == words,
                       "gold round-trip for doc " + doc.doc_id);
        }
        check.equal(seen.size(), variants.size(),
                    "distinct position sets for n=" + std::to_string(n));
    }
}

// ============================================================================
// CRITERION 2: prompt fidelity against the golden files
// ============================================================================

void criterion_prompt_fidelity(Check& check) {
    const std::string dir = LACUNA_GOLDEN_DIR;

    MaskedVariant variant;
    variant.doc_id = "P100";
    variant.variant_id = 0;
    variant.positions = {1, 3};
    variant.gold = {"szarru", "mat"};
    variant.language = "Akkadian";
    const std::vector<std::string> words = {"ina", "szarru", "e2", "mat", "ki"};
    const auto masked = masked_words(words, variant.positions, "[MASK]");

    check.that(build_prompt_all(masked, variant).text == read_file(dir + "/prompt_all.txt"),
               "all-method prompt matches prompt_all.txt");

    const auto each = build_prompts_one_by_one(masked, variant, Placeholders{});
    check.equal(each.size(), std::size_t{2}, "one prompt per masked position");
    if (each.size() == 2) {
        check.that(each[0].text == read_file(dir + "/prompt_one_by_one_0.txt"),
                   "first one-by-one prompt matches prompt_one_by_one_0.txt");
        check.that(each[1].text == read_file(dir + "/prompt_one_by_one_1.txt"),
                   "second one-by-one prompt matches prompt_one_by_one_1.txt");
    }

    check.that(build_prompt_restore(masked, variant).text ==
                   read_file(dir + "/prompt_restore.txt"),
               "restore prompt matches prompt_restore.txt");
}

// ============================================================================
// CRITERION 3: n-gram oracle equivalence on a 5-document corpus
//
// The oracle recounts every n-gram window from scratch into ordinary maps
// and reimplements add-kappa scoring with stupid backoff, sharing nothing
// with the library but the subword inventory.
// ============================================================================

struct RecountModel {
    const SubwordVocab& vocab;
    std::uint32_t order;
    double kappa, backoff;
    // counts[m-1]: context of length m-1 -> next id -> count.
    std::vector<std::map<std::vector<std::uint32_t>, std::map<std::uint32_t, std::uint64_t>>>
        counts;

    RecountModel(const Corpus& corpus, const SubwordVocab& v, std::uint32_t order_, double kappa_,
                 double backoff_)
        : vocab(v), order(order_), kappa(kappa_), backoff(backoff_), counts(order_) {
        std::vector<std::uint32_t> stream;
        for (std::size_t d = 0; d < corpus.size(); ++d) {
            if (d > 0) stream.push_back(vocab.eot_id());
            for (const auto& word : corpus[d].words) {
                const auto ids = tokenize_word(vocab, word);
                stream.insert(stream.end(), ids.begin(), ids.end());
            }
        }
        for (std::uint32_t m = 1; m <= order; ++m) {
            if (stream.size() < m) break;
            for (std::size_t i = m - 1; i < stream.size(); ++i) {
                const std::vector<std::uint32_t> ctx(stream.begin() + (i - (m - 1)),
                                                     stream.begin() + i);
                ++counts[m - 1][ctx][stream[i]];
            }
        }
    }

    void score(std::uint32_t m, const std::vector<std::uint32_t>& context,
               std::vector<double>& out) const {
        std::vector<std::uint32_t> suffix;
        if (m > 1) suffix.assign(context.end() - (m - 1), context.end());
        const auto it = counts[m - 1].find(suffix);
        if (m > 1 && it == counts[m - 1].end()) {
            score(m - 1, context, out);
            for (double& x : out) x *= backoff;
            return;
        }
        std::uint64_t total = 0;
        if (it != counts[m - 1].end()) {
            for (const auto& [id, c] : it->second) total += c;
        }
        const double denom = static_cast<double>(total) + kappa * vocab.size();
        for (std::uint32_t id = 0; id < vocab.size(); ++id) {
            std::uint64_t c = 0;
            if (it != counts[m - 1].end()) {
                const auto jt = it->second.find(id);
                if (jt != it->second.end()) c = jt->second;
            }
            out[id] = (static_cast<double>(c) + kappa) / denom;
        }
    }

    std::vector<double> next(std::vector<std::uint32_t> context) const {
        const std::uint32_t m = static_cast<std::uint32_t>(
            std::min<std::size_t>(order, context.size() + 1));
        if (context.size() > m - 1) {
            context.assign(context.end() - (m - 1), context.end());
        }
        std::vector<double> out(vocab.size(), 0.0);
        score(m, context, out);
        double sum = 0.0;
        for (double x : out) sum += x;
        for (double& x : out) x /= sum;
        return out;
    }
};

void criterion_ngram_oracle(Check& check) {
    const Corpus corpus = {
        make_doc("T1", {"ina", "szarru", "ina", "e2"}),
        make_doc("T2", {"szarru", "ina", "mat"}),
        make_doc("T3", {"e2", "ki", "mat", "mat"}),
        make_doc("T4", {"ina", "ki", "szarru", "e2", "ina"}),
        make_doc("T5", {"mat"}),
    };
    NgramConfig cfg;
    cfg.order = 3;
    const NgramModel model = NgramModel::train(corpus, cfg);
    const RecountModel oracle(corpus, model.vocab(), cfg.order, cfg.kappa, cfg.backoff);
    const std::uint32_t V = model.vocab().size();

    std::vector<std::vector<std::uint32_t>> contexts;
    contexts.push_back({});
    for (std::uint32_t a = 0; a < V; ++a) {
        contexts.push_back({a});
        for (std::uint32_t b = 0; b < V; ++b) contexts.push_back({a, b});
    }
    // Overlong contexts: only the last order-1 ids may matter.
    std::mt19937_64 rng(7);
    for (int i = 0; i < 30; ++i) {
        std::vector<std::uint32_t> ctx(5);
        for (auto& id : ctx) id = static_cast<std::uint32_t>(rng() % V);
        contexts.push_back(ctx);
    }

    for (const auto& ctx : contexts) {
        const auto got = model.next_distribution(ctx);
        const auto want = oracle.next(ctx);
        double sum = 0.0;
        for (std::uint32_t id = 0; id < V; ++id) {
            sum += got[id];
            if (std::fabs(got[id] - want[id]) > 1e-12) {
                std::ostringstream msg;
                msg << "pair mismatch at ctx len " << ctx.size() << " id " << id << ": got "
                    << std::setprecision(17) << got[id] << ", want " << want[id];
                check.that(false, msg.str());
            } else {
                check.that(true, "");
            }
        }
        check.close(sum, 1.0, 1e-9, "distribution sums to 1");
    }
}

// ============================================================================
// CRITERION 4: restore decoding correctness
//
// (a) On a corpus whose transitions are deterministic-dominant, the greedy
//     force decoder must pick the same word as exhaustive search over every
//     vocabulary word, scored by chained conditional probabilities with the
//     identical left context. The walk below replays predict_restore's
//     context handling step by step.
// (b) 500 random variants keep their word count after restoration.
// (c) With the ban enabled the mask placeholder is never predicted, even
//     when the training data makes it the unconstrained argmax.
// ============================================================================

Corpus restore_training_corpus() {
    Corpus corpus;
    std::vector<std::string> a, b, c;
    for (int i = 0; i < 50; ++i) { a.push_back("ina"); a.push_back("szarri"); }
    for (int i = 0; i < 40; ++i) { b.push_back("eli"); b.push_back("nakiri"); }
    for (int i = 0; i < 30; ++i) { c.push_back("itti"); c.push_back("ummani"); }
    corpus.push_back(make_doc("A", a));
    corpus.push_back(make_doc("B", b));
    corpus.push_back(make_doc("C", c));
    corpus.push_back(make_doc("D", std::vector<std::string>(8, "ina")));
    corpus.push_back(make_doc("E", std::vector<std::string>(6, "eli")));
    corpus.push_back(make_doc("F", std::vector<std::string>(4, "itti")));
    return corpus;
}

const std::vector<std::string>& restore_lexicon() {
    static const std::vector<std::string> words = {"eli",    "ina",    "itti",
                                                   "nakiri", "szarri", "ummani"};
    return words;
}

// Chained conditional probability of emitting `word` after `context`.
double word_probability(const NgramBackend& backend, std::vector<std::uint32_t> context,
                        const std::string& word) {
    double p = 1.0;
    for (const std::uint32_t id : tokenize_word(backend.vocab(), word)) {
        p *= backend.next_distribution(context)[id];
        context.push_back(id);
    }
    return p;
}

std::string exhaustive_best_word(const NgramBackend& backend,
                                 const std::vector<std::uint32_t>& context) {
    std::string best;
    double best_p = -1.0;
    for (const auto& word : restore_lexicon()) {
        const double p = word_probability(backend, context, word);
        if (p > best_p) {
            best_p = p;
            best = word;
        }
    }
    return best;
}

void criterion_restore_decoding(Check& check) {
    NgramConfig cfg;
    cfg.order = 3;
    const NgramModel model = NgramModel::train(restore_training_corpus(), cfg);
    const NgramBackend backend(model);
    const SubwordVocab& vocab = backend.vocab();
    const auto& lexicon = restore_lexicon();

    // (a) Greedy force decode vs exhaustive word search, at every masked
    // position of 10 documents x 15 variants.
    std::mt19937_64 rng(41);
    Corpus dev;
    for (int d = 0; d < 10; ++d) {
        std::vector<std::string> words(18);
        for (auto& w : words) w = lexicon[rng() % lexicon.size()];
        dev.push_back(make_doc("R" + std::to_string(d), words));
    }
    MaskingConfig mask_cfg;
    std::size_t compared = 0;
    for (const auto& doc : dev) {
        mask_cfg.seed = 1000 + compared;
        for (const auto& variant : generate_variants(doc, mask_cfg)) {
            const VariantInput input = make_variant_input(doc, variant, "[MASK]");
            const MethodResult via_api =
                predict_restore(backend, input, SamplingParams{}, "ngram");
            check.equal(via_api.records.size(), variant.positions.size(),
                        "one record per masked position");

            std::vector<std::uint32_t> ctx =
                tokenize_text(vocab, build_prompt_restore(input.words, variant).text);
            std::size_t next_mask = 0;
            for (std::size_t i = 0; i < input.words.size(); ++i) {
                if (next_mask < variant.positions.size() && variant.positions[next_mask] == i) {
                    const auto decoded = force_decode_word(backend, ctx, {vocab.mask_id()});
                    const std::string want = exhaustive_best_word(backend, ctx);
                    check.that(decoded.word == want,
                               "greedy '" + decoded.word + "' vs exhaustive '" + want +
                                   "' in " + variant.doc_id + " at position " +
                                   std::to_string(i));
                    check.that(via_api.records[next_mask].predicted == decoded.word,
                               "predict_restore agrees with the replayed walk");
                    ctx.insert(ctx.end(), decoded.ids.begin(), decoded.ids.end());
                    ++next_mask;
                    ++compared;
                } else {
                    const auto ids = tokenize_word(vocab, input.words[i]);
                    ctx.insert(ctx.end(), ids.begin(), ids.end());
                }
            }
        }
    }
    check.that(compared >= 400, "at least 400 masked positions compared");

    // (b) Word-count preservation over 500 random variants.
    Corpus wide;
    for (int d = 0; d < 100; ++d) {
        std::vector<std::string> words(5 + (static_cast<std::size_t>(d) * 11) % 36);
        for (auto& w : words) w = lexicon[rng() % lexicon.size()];
        wide.push_back(make_doc("W" + std::to_string(d), words));
    }
    MaskingConfig wide_cfg;
    wide_cfg.seed = 99;
    const auto variants = mask_corpus(wide, wide_cfg);
    check.that(variants.size() >= 500, "corpus yields at least 500 variants");
    const auto inputs = build_variant_inputs(wide, variants, "[MASK]");
    std::map<std::string, const Document*> docs;
    for (const auto& doc : wide) docs[doc.doc_id] = &doc;
    for (std::size_t i = 0; i < std::min<std::size_t>(500, inputs.size()); ++i) {
        const auto& input = inputs[i];
        const MethodResult mr = predict_restore(backend, input, SamplingParams{}, "ngram");
        const Document& doc = *docs.at(input.variant.doc_id);
        std::vector<std::string> restored = input.words;
        bool filled = mr.records.size() == input.variant.positions.size();
        for (std::size_t j = 0; j < mr.records.size() && filled; ++j) {
            if (mr.records[j].predicted.empty()) filled = false;
            restored[input.variant.positions[j]] = mr.records[j].predicted;
        }
        check.that(filled, "every masked position restored in " + input.variant.doc_id);
        check.equal(split_words(join_words(restored)).size(), doc.words.size(),
                    "restored word count for " + input.variant.doc_id);
    }

    // (c) The ban. Training data where "[MASK]" literally follows "ina" more
    // often than anything else, so the unconstrained argmax would emit it.
    Corpus poisoned = restore_training_corpus();
    std::vector<std::string> trap;
    for (int i = 0; i < 60; ++i) { trap.push_back("ina"); trap.push_back("[MASK]"); }
    poisoned.push_back(make_doc("G", trap));
    const NgramBackend trap_backend(NgramModel::train(poisoned, cfg));

    std::size_t banned_hits = 0, unbanned_hits = 0;
    for (const auto& doc : dev) {
        MaskingConfig seeded;
        seeded.seed = 7;
        for (const auto& variant : generate_variants(doc, seeded)) {
            const VariantInput input = make_variant_input(doc, variant, "[MASK]");
            for (const auto& rec :
                 predict_restore(trap_backend, input, SamplingParams{}, "ngram", true).records) {
                if (rec.predicted == "[MASK]") ++banned_hits;
            }
            for (const auto& rec :
                 predict_restore(trap_backend, input, SamplingParams{}, "ngram", false).records) {
                if (rec.predicted == "[MASK]") ++unbanned_hits;
            }
        }
    }
    check.equal(banned_hits, std::size_t{0}, "banned decoder never predicts the placeholder");
    check.that(unbanned_hits > 0,
               "without the ban the placeholder is predicted (the ban is load-bearing)");
}

// ============================================================================
// CRITERION 5: voting oracle over 60 synthetic runs
// ============================================================================

using VoteKey = std::tuple<std::string, std::uint32_t, std::size_t>;

void criterion_voting_oracle(Check& check) {
    const std::vector<std::string> lexicon = {"anaku", "belu", "ilu", "sarru", "umma"};
    std::vector<VoteKey> keys;
    for (int d = 0; d < 5; ++d) {
        for (std::uint32_t v = 0; v < 2; ++v) {
            for (const std::size_t pos : {std::size_t{0}, std::size_t{3}, std::size_t{7}}) {
                keys.emplace_back("V" + std::to_string(d), v, pos);
            }
        }
    }

    const std::size_t n_runs = 60;
    std::vector<std::vector<PredictionRecord>> runs(n_runs);
    for (std::size_t r = 0; r < n_runs; ++r) {
        for (std::size_t k = 0; k < keys.size(); ++k) {
            PredictionRecord rec;
            rec.system_id = "sys" + std::to_string(r);
            rec.method = Method::All;
            rec.doc_id = std::get<0>(keys[k]);
            rec.variant_id = std::get<1>(keys[k]);
            rec.position = std::get<2>(keys[k]);
            const std::uint64_t h = mix(r + 1, k + 1);
            rec.predicted = (h % 7 == 0) ? "" : lexicon[h % lexicon.size()];
            runs[r].push_back(rec);
        }
    }

    // Brute-force tally: count words per key, sort by count desc then word
    // asc, truncate to top_k.
    VoteConfig cfg;
    cfg.top_k = 3;
    cfg.min_systems = 1;
    std::map<VoteKey, std::map<std::string, std::size_t>> tally;
    for (const auto& key : keys) tally[key];  // every key appears, even all-blank
    for (const auto& run : runs) {
        for (const auto& rec : run) {
            if (rec.predicted.empty()) continue;
            ++tally[{rec.doc_id, rec.variant_id, rec.position}][rec.predicted];
        }
    }
    std::vector<RankedPrediction> want;
    for (const auto& [key, words] : tally) {
        RankedPrediction rp;
        rp.doc_id = std::get<0>(key);
        rp.variant_id = std::get<1>(key);
        rp.position = std::get<2>(key);
        std::vector<std::pair<std::string, std::size_t>> ranked(words.begin(), words.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (ranked.size() > cfg.top_k) ranked.resize(cfg.top_k);
        rp.ranked = std::move(ranked);
        want.push_back(std::move(rp));
    }

    const auto compare = [&](const std::vector<RankedPrediction>& got, const std::string& label) {
        check.equal(got.size(), want.size(), label + ": entry count");
        for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
            const bool same = got[i].doc_id == want[i].doc_id &&
                              got[i].variant_id == want[i].variant_id &&
                              got[i].position == want[i].position &&
                              got[i].ranked == want[i].ranked;
            check.that(same, label + ": entry " + std::to_string(i) + " (" + got[i].doc_id +
                                 ") matches the brute-force tally");
        }
    };
    compare(majority_vote(runs, cfg), "original order");

    // Permutation invariance: shuffle both run order and record order.
    std::mt19937_64 rng(2024);
    for (int s = 0; s < 20; ++s) {
        auto shuffled = runs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (auto& run : shuffled) std::shuffle(run.begin(), run.end(), rng);
        compare(majority_vote(shuffled, cfg), "shuffle " + std::to_string(s));
    }

    // Explicit lexicographic tie: two words with equal counts.
    std::vector<std::vector<PredictionRecord>> tied(4);
    for (std::size_t r = 0; r < 4; ++r) {
        PredictionRecord rec;
        rec.system_id = "sys" + std::to_string(r);
        rec.doc_id = "T";
        rec.variant_id = 0;
        rec.position = 2;
        rec.predicted = (r < 2) ? "zumru" : "abdu";
        tied[r].push_back(rec);
    }
    const auto ranked = majority_vote(tied, cfg);
    check.equal(ranked.size(), std::size_t{1}, "tie case: one key");
    if (ranked.size() == 1 && ranked[0].ranked.size() == 2) {
        check.that(ranked[0].ranked[0] == std::make_pair(std::string("abdu"), std::size_t{2}) &&
                       ranked[0].ranked[1] == std::make_pair(std::string("zumru"), std::size_t{2}),
                   "equal counts are ordered lexicographically");
    } else {
        check.that(false, "tie case: expected exactly two ranked words");
    }
}

// ============================================================================
// CRITERION 6: metric identities
// ============================================================================

void criterion_metric_identities(Check& check) {
    const std::vector<std::string> lexicon = {"anaku", "belu", "ilu", "sarru", "umma", "zeru"};

    // Gold variants: 8 documents, one variant each, positions {0, 2, 4}.
    std::vector<MaskedVariant> variants;
    std::vector<std::vector<std::string>> doc_words;
    for (int d = 0; d < 8; ++d) {
        MaskedVariant v;
        v.doc_id = "M" + std::to_string(d);
        v.variant_id = 0;
        v.positions = {0, 2, 4};
        v.language = (d % 2 == 0) ? "Akkadian" : "Sumerian";
        std::vector<std::string> words(6);
        for (std::size_t i = 0; i < words.size(); ++i) {
            words[i] = lexicon[mix(d + 1, i + 100) % lexicon.size()];
        }
        for (const std::size_t pos : v.positions) v.gold.push_back(words[pos]);
        variants.push_back(v);
        doc_words.push_back(std::move(words));
    }

    // Five runs, roughly half correct.
    std::vector<std::vector<PredictionRecord>> runs(5);
    for (std::size_t r = 0; r < runs.size(); ++r) {
        for (const auto& v : variants) {
            for (std::size_t j = 0; j < v.positions.size(); ++j) {
                PredictionRecord rec;
                rec.system_id = "sys" + std::to_string(r);
                rec.method = Method::All;
                rec.doc_id = v.doc_id;
                rec.variant_id = v.variant_id;
                rec.position = v.positions[j];
                const std::uint64_t h = mix(r + 17, rec.position + 31 * (v.doc_id.back() - '0'));
                if (h % 11 == 0) {
                    rec.predicted = "";
                } else if (h % 2 == 0) {
                    rec.predicted = v.gold[j];
                } else {
                    rec.predicted = lexicon[h % lexicon.size()];
                }
                runs[r].push_back(rec);
            }
        }
    }

    // (a) topk_accuracy at k=1 equals plain accuracy of the vote winners.
    VoteConfig vote_cfg;
    vote_cfg.top_k = 3;
    const auto ranked = majority_vote(runs, vote_cfg);
    const double top1 = topk_accuracy(ranked, variants, 1);
    std::vector<PredictionRecord> winners;
    for (const auto& rp : ranked) {
        PredictionRecord rec;
        rec.system_id = "vote";
        rec.method = Method::All;
        rec.doc_id = rp.doc_id;
        rec.variant_id = rp.variant_id;
        rec.position = rp.position;
        rec.predicted = rp.ranked.empty() ? "" : rp.ranked[0].first;
        winners.push_back(rec);
    }
    const EvalReport winner_report = score_accuracy(winners, variants);
    check.that(top1 == winner_report.overall.accuracy,
               "topk_accuracy(k=1) equals top-1 accuracy of vote winners");

    // (b) score_accuracy matches a rescoring pass over the raw JSONL bytes,
    // parsed here with plain nlohmann::json and counted by hand.
    TempDir tmp;
    std::vector<VariantFileEntry> entries;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        VariantFileEntry e;
        e.variant = variants[i];
        e.masked_text = join_words(masked_words(doc_words[i], variants[i].positions, "[MASK]"));
        entries.push_back(std::move(e));
    }
    write_variants_jsonl(tmp.file("variants.jsonl"), entries);
    write_predictions_jsonl(tmp.file("run0.jsonl"), runs[0]);

    std::map<VoteKey, std::string> gold_by_key;
    {
        std::ifstream in(tmp.file("variants.jsonl"));
        std::string line;
        while (std::getline(in, line)) {
            const auto j = nlohmann::json::parse(line);
            const auto positions = j.at("positions");
            const auto gold = j.at("gold");
            for (std::size_t i = 0; i < positions.size(); ++i) {
                gold_by_key[{j.at("doc_id").get<std::string>(),
                             j.at("variant_id").get<std::uint32_t>(),
                             positions[i].get<std::size_t>()}] = gold[i].get<std::string>();
            }
        }
    }
    std::size_t raw_correct = 0, raw_seen = 0;
    {
        std::ifstream in(tmp.file("run0.jsonl"));
        std::string line;
        while (std::getline(in, line)) {
            const auto j = nlohmann::json::parse(line);
            const VoteKey key{j.at("doc_id").get<std::string>(),
                              j.at("variant_id").get<std::uint32_t>(),
                              j.at("position").get<std::size_t>()};
            ++raw_seen;
            if (gold_by_key.count(key) && gold_by_key[key] == j.at("predicted").get<std::string>())
                ++raw_correct;
        }
    }
    const EvalReport run0 = score_accuracy(runs[0], variants);
    check.equal(raw_seen, gold_by_key.size(), "raw JSONL covers every gold key");
    check.equal(run0.overall.n_positions, gold_by_key.size(), "n_positions equals gold keys");
    check.equal(run0.overall.n_correct, raw_correct, "n_correct equals the raw JSONL recount");
    check.that(run0.overall.accuracy ==
                   static_cast<double>(raw_correct) / static_cast<double>(gold_by_key.size()),
               "accuracy is exactly the recounted ratio");

    // (c) Untruncated frequency table sums to 1.
    std::vector<std::string> words;
    for (int i = 0; i < 600; ++i) {
        words.push_back("w" + std::to_string(mix(5, i) % 30));
    }
    const FrequencyTable table = frequency_report(words, words.size());
    check.equal(table.total, std::uint64_t{600}, "frequency table total");
    check.equal(table.top.size(), table.unique, "untruncated table lists every unique word");
    double sum = 0.0;
    std::uint64_t count_sum = 0;
    for (const auto& e : table.top) {
        sum += e.frequency;
        count_sum += e.count;
    }
    check.close(sum, 1.0, 1e-12, "frequencies sum to 1");
    check.equal(count_sum, std::uint64_t{600}, "counts sum to the total");
}

// ============================================================================
// CRITERION 7: most-common-word baseline vs enumeration oracle
// ============================================================================

void criterion_baseline_oracle(Check& check) {
    // Every document is 20 words: 8 copies of the planted word (40%) plus
    // 2 copies of each of six fillers, shuffled per document.
    const std::vector<std::string> fillers = {"belu", "e2", "ilu", "ki", "mat", "umma"};
    const auto build = [&](const std::string& prefix, int count, std::uint64_t salt) {
        Corpus corpus;
        for (int d = 0; d < count; ++d) {
            std::vector<std::string> words(8, "ina");
            for (const auto& f : fillers) {
                words.push_back(f);
                words.push_back(f);
            }
            std::mt19937_64 rng(mix(salt, d));
            std::shuffle(words.begin(), words.end(), rng);
            corpus.push_back(make_doc(prefix + std::to_string(d), words));
        }
        return corpus;
    };
    const Corpus train = build("TR", 30, 1);
    const Corpus dev = build("DV", 12, 2);

    const auto most_common = most_common_words(train);
    check.that(most_common.count("Akkadian") && most_common.at("Akkadian") == "ina",
               "planted word is the most common training word");

    MaskingConfig cfg;
    cfg.seed = 5;
    const auto variants = mask_corpus(dev, cfg);
    std::size_t total = 0, planted = 0;
    for (const auto& v : variants) {
        total += v.gold.size();
        for (const auto& g : v.gold) {
            if (g == "ina") ++planted;
        }
    }
    check.that(total > 0 && planted > 0 && planted < total,
               "enumeration sees both planted and filler gold words");

    const EvalReport baseline = most_common_word_baseline(train, variants);
    check.equal(baseline.overall.n_positions, total, "baseline scores every masked position");
    check.equal(baseline.overall.n_correct, planted, "baseline hits exactly the planted gold");
    check.that(baseline.overall.accuracy ==
                   static_cast<double>(planted) / static_cast<double>(total),
               "baseline accuracy equals the enumerated masked-position frequency");
}

// ============================================================================
// CRITERION 8: end-to-end determinism and baseline superiority
//
// Runs the installed CLI twice from the repository root over the bundled
// corpus, then compares per-artifact digests from the two manifests and
// reads the accuracy numbers back out of report.json.
// ============================================================================

void criterion_end_to_end(Check& check) {
    TempDir tmp;
    const std::string out1 = tmp.file("run1");
    const std::string out2 = tmp.file("run2");
    const std::string base = std::string("cd \"") + LACUNA_REPO_DIR + "\" && \"" +
                             LACUNA_CLI_PATH + "\" run --config data/pipeline.toml --output-dir ";

    for (const std::string& out : {out1, out2}) {
        const auto [code, output] = run_command(base + "\"" + out + "\" 2>&1");
        check.equal(code, 0, "pipeline run exits 0 (output: " + output.substr(0, 400) + ")");
    }

    // Per-artifact digests, keyed by file name so distinct output
    // directories compare equal.
    const auto digests = [&check](const std::string& dir) {
        std::map<std::string, std::string> by_name;
        try {
            const auto manifest = read_json_file(dir + "/manifest.json");
            for (const auto& [path, digest] : manifest.at("output_digests").items()) {
                by_name[std::filesystem::path(path).filename().string()] =
                    digest.get<std::string>();
            }
        } catch (const std::exception& e) {
            check.that(false, std::string("manifest unreadable: ") + e.what());
        }
        return by_name;
    };
    const auto d1 = digests(out1);
    const auto d2 = digests(out2);
    check.that(d1.size() >= 10, "manifest lists the full artifact set");
    check.that(!d1.empty() && d1 == d2, "artifact digests identical across the two runs");

    try {
        const auto report = read_json_file(out1 + "/report.json");
        const double restore =
            report.at("methods").at("restore").at("overall").at("accuracy").get<double>();
        const double baseline = report.at("baseline").at("overall").at("accuracy").get<double>();
        std::ostringstream msg;
        msg << "restore accuracy " << restore << " strictly exceeds baseline " << baseline;
        check.that(restore > baseline, msg.str());
    } catch (const std::exception& e) {
        check.that(false, std::string("report unreadable: ") + e.what());
    }
}

// ============================================================================
// CRITERION 9: remote protocol conformance against a scripted server
// ============================================================================

nlohmann::json chat_reply(const std::string& content) {
    return {{"id", "mock"},
            {"choices",
             nlohmann::json::array(
                 {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}})}};
}

void criterion_remote_conformance(Check& check) {
    httplib::Server server;
    std::string shape_body, shape_content_type;
    std::atomic<int> retry_calls{0}, fail_calls{0};

    server.Post("/shape", [&](const httplib::Request& req, httplib::Response& res) {
        shape_body = req.body;
        shape_content_type = req.get_header_value("Content-Type");
        res.set_content(chat_reply("WORDS: szarru, mat").dump(), "application/json");
    });
    server.Post("/retry", [&](const httplib::Request&, httplib::Response& res) {
        if (++retry_calls <= 2) {
            res.status = 429;
            res.set_content("slow down", "text/plain");
        } else {
            res.set_content(chat_reply("pong").dump(), "application/json");
        }
    });
    server.Post("/fail", [&](const httplib::Request&, httplib::Response& res) {
        ++fail_calls;
        res.status = 500;
        res.set_content("boom", "text/plain");
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    check.that(port > 0, "mock server binds a port");
    std::thread thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();
    const std::string host = "http://127.0.0.1:" + std::to_string(port);

    // Shared fixture document.
    MaskedVariant variant;
    variant.doc_id = "P100";
    variant.variant_id = 0;
    variant.positions = {1, 3};
    variant.gold = {"szarru", "mat"};
    variant.language = "Akkadian";
    const std::vector<std::string> words = {"ina", "szarru", "e2", "mat", "ki"};
    const Document doc = make_doc("P100", words);
    const VariantInput input = make_variant_input(doc, variant, "[MASK]");

    SamplingParams params;
    params.temperature = 0.2;
    params.max_new_tokens = 16;
    params.stop_sequences = {"\n"};
    params.seed = 99;

    // (a) predict_all sends well-formed chat-completion JSON and parses the
    // reply into one record per masked position.
    {
        RemoteBackendConfig cfg;
        cfg.endpoint = host + "/shape";
        cfg.model = "mock-model";
        cfg.timeout_s = 5.0;
        cfg.max_retries = 1;
        cfg.backoff_base_ms = 1;
        RemoteBackend backend(cfg);
        const MethodResult mr = predict_all(backend, input, params, "remote");
        check.equal(mr.failures, std::size_t{0}, "shape call succeeds");
        check.that(mr.records.size() == 2 && mr.records[0].predicted == "szarru" &&
                       mr.records[1].predicted == "mat",
                   "reply parsed into per-position records");

        check.equal(shape_content_type, std::string("application/json"),
                    "request content type");
        try {
            const auto body = nlohmann::json::parse(shape_body);
            for (const char* key : {"model", "messages", "temperature", "max_tokens", "stop",
                                    "seed"}) {
                check.that(body.contains(key), std::string("request body carries ") + key);
            }
            check.equal(body.at("model").get<std::string>(), std::string("mock-model"),
                        "request model");
            check.equal(body.at("messages").size(), std::size_t{1}, "single user message");
            check.equal(body.at("messages")[0].at("role").get<std::string>(),
                        std::string("user"), "message role");
            const auto masked = masked_words(words, variant.positions, "[MASK]");
            check.that(body.at("messages")[0].at("content").get<std::string>() ==
                           build_prompt_all(masked, variant).text,
                       "message content is the rendered all-method prompt");
            check.that(body.at("temperature").get<double>() == params.temperature,
                       "temperature forwarded");
            check.equal(body.at("max_tokens").get<std::size_t>(), params.max_new_tokens,
                        "max_tokens forwarded");
            check.equal(body.at("seed").get<std::uint64_t>(), params.seed, "seed forwarded");
        } catch (const std::exception& e) {
            check.that(false, std::string("request body is not valid JSON: ") + e.what());
        }
    }

    // (b) 429 responses are retried with backoff until the server relents.
    {
        RemoteBackendConfig cfg;
        cfg.endpoint = host + "/retry";
        cfg.model = "mock-model";
        cfg.timeout_s = 5.0;
        cfg.max_retries = 3;
        cfg.backoff_base_ms = 1;
        try {
            const std::string reply = remote_complete(cfg, "ping", params);
            check.equal(reply, std::string("pong"), "retry eventually returns the reply");
        } catch (const std::exception& e) {
            check.that(false, std::string("retry path threw: ") + e.what());
        }
        check.equal(retry_calls.load(), 3, "two 429s then success = three requests");
    }

    // (c) Permanent failure degrades to empty predictions; the run finishes.
    {
        RemoteBackendConfig cfg;
        cfg.endpoint = host + "/fail";
        cfg.model = "mock-model";
        cfg.timeout_s = 5.0;
        cfg.max_retries = 1;
        cfg.backoff_base_ms = 1;
        RemoteBackend backend(cfg);

        std::vector<VariantInput> inputs;
        for (int d = 0; d < 3; ++d) {
            Document failing = make_doc("F" + std::to_string(d), words);
            MaskedVariant v = variant;
            v.doc_id = failing.doc_id;
            inputs.push_back(make_variant_input(failing, v, "[MASK]"));
        }
        RunOptions opts;
        opts.method = Method::All;
        opts.params = params;
        opts.system_id = "remote";
        try {
            const RunResult run = run_predictions(inputs, &backend, nullptr, opts);
            check.equal(run.failures, std::size_t{3}, "every variant reports one failed call");
            check.equal(run.records.size(), std::size_t{6}, "records still cover every position");
            for (const auto& rec : run.records) {
                check.that(rec.predicted.empty(), "failed calls yield empty predictions");
            }
        } catch (const std::exception& e) {
            check.that(false, std::string("permanent failure aborted the run: ") + e.what());
        }
        check.that(fail_calls.load() >= 3, "failing endpoint was actually exercised");
    }

    server.stop();
    thread.join();
}

}  // namespace

// ============================================================================
// DRIVER
// ============================================================================

int main() {
    const std::vector<Criterion> criteria = {
        {"masking-law", 5.0, criterion_masking_law},
        {"prompt-fidelity", 0.0, criterion_prompt_fidelity},
        {"ngram-oracle", 1.0, criterion_ngram_oracle},
        {"restore-decoding", 30.0, criterion_restore_decoding},
        {"voting-oracle", 5.0, criterion_voting_oracle},
        {"metric-identities", 0.0, criterion_metric_identities},
        {"baseline-oracle", 0.0, criterion_baseline_oracle},
        {"end-to-end", 120.0, criterion_end_to_end},
        {"remote-conformance", 0.0, criterion_remote_conformance},
    };

    std::cout << "==========================================================================\n";
    std::cout << " lacuna acceptance suite\n";
    std::cout << "==========================================================================\n";

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& criterion = criteria[i];
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.body(check);
        } catch (const std::exception& e) {
            check.that(false, std::string("unhandled exception: ") + e.what());
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        bool pass = check.failures().empty();
        std::string budget_note;
        if (criterion.budget_s > 0) {
            std::ostringstream note;
            note << " / budget " << criterion.budget_s << " s";
            budget_note = note.str();
            if (seconds >= criterion.budget_s) pass = false;
        }

        std::cout << "[" << (pass ? "PASS" : "FAIL") << "] " << std::left << std::setw(20)
                  << criterion.name << std::right << std::fixed << std::setprecision(2)
                  << std::setw(7) << seconds << " s" << budget_note << "  (" << check.total()
                  << " checks)\n";
        if (!pass) {
            ++failed;
            if (criterion.budget_s > 0 && seconds >= criterion.budget_s) {
                std::cout << "       - wall clock exceeded the budget\n";
            }
            std::size_t shown = 0;
            for (const auto& failure : check.failures()) {
                std::cout << "       - " << failure << "\n";
                if (++shown == 5) {
                    std::cout << "       - (" << (check.failures().size() - shown)
                              << " more suppressed)\n";
                    break;
                }
            }
        }
    }

    std::cout << "==========================================================================\n";
    std::cout << " " << (criteria.size() - failed) << "/" << criteria.size()
              << " criteria passed\n";
    std::cout << "==========================================================================\n";
    return failed;
}
