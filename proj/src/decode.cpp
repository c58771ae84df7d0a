#include "lacuna/decode.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <sstream>

#include "lacuna/errors.hpp"
#include "lacuna/rng.hpp"

namespace lacuna {

namespace {

constexpr std::size_t kMaxWordSubwords = 64;
constexpr const char* kWrapperPunct = ".,;:!?\"'`()";

std::string to_lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string first_whitespace_token(const std::string& item) {
    std::size_t begin = 0;
    while (begin < item.size() && std::isspace(static_cast<unsigned char>(item[begin]))) ++begin;
    std::size_t end = begin;
    while (end < item.size() && !std::isspace(static_cast<unsigned char>(item[end]))) ++end;
    return item.substr(begin, end - begin);
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::istringstream in(text);
    std::string w;
    while (in >> w) words.push_back(w);
    return words;
}

PredictionRecord make_record(const std::string& system_id, Method method,
                             const MaskedVariant& variant, std::size_t position,
                             std::string predicted) {
    PredictionRecord rec;
    rec.system_id = system_id;
    rec.method = method;
    rec.doc_id = variant.doc_id;
    rec.variant_id = variant.variant_id;
    rec.position = position;
    rec.predicted = std::move(predicted);
    return rec;
}

}  // namespace

VariantInput make_variant_input(const Document& doc, const MaskedVariant& variant,
                                const std::string& mask_placeholder) {
    VariantInput input;
    input.variant = variant;
    input.words = masked_words(doc.words, variant.positions, mask_placeholder);
    return input;
}

VariantInput variant_input_from_text(const MaskedVariant& variant, const std::string& masked_text,
                                     const std::string& mask_placeholder) {
    VariantInput input;
    input.variant = variant;
    input.words = split_words(masked_text);
    for (std::size_t p : variant.positions) {
        if (p >= input.words.size() || input.words[p] != mask_placeholder) {
            throw IngestError("masked text for doc_id=" + variant.doc_id + " variant " +
                              std::to_string(variant.variant_id) +
                              " does not carry the placeholder at position " + std::to_string(p));
        }
    }
    return input;
}

std::vector<std::string> parse_all_output(const std::string& text, std::size_t expected_k) {
    const std::string lower = to_lower(text);
    const std::size_t marker = lower.rfind("words:");
    const std::string tail = marker == std::string::npos ? text : text.substr(marker + 6);

    std::vector<std::string> words;
    std::size_t start = 0;
    while (start <= tail.size()) {
        const std::size_t comma = tail.find(',', start);
        const std::string item =
            comma == std::string::npos ? tail.substr(start) : tail.substr(start, comma - start);
        words.push_back(first_whitespace_token(item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    words.resize(expected_k);
    return words;
}

std::string first_token_normalized(const std::string& reply) {
    std::string token = first_whitespace_token(reply);
    std::size_t begin = 0;
    std::size_t end = token.size();
    while (begin < end && std::strchr(kWrapperPunct, token[begin]) != nullptr) ++begin;
    while (end > begin && std::strchr(kWrapperPunct, token[end - 1]) != nullptr) --end;
    return token.substr(begin, end - begin);
}

MethodResult predict_all(TextBackend& backend, const VariantInput& input,
                         const SamplingParams& params, const std::string& system_id) {
    const auto& variant = input.variant;
    const PromptInstance prompt = build_prompt_all(input.words, variant);
    MethodResult result;
    std::vector<std::string> words(variant.positions.size());
    try {
        const std::string reply = backend.generate(prompt.text, params);
        words = parse_all_output(reply, variant.positions.size());
    } catch (const std::runtime_error&) {
        result.failures = 1;
    }
    for (std::size_t i = 0; i < variant.positions.size(); ++i) {
        result.records.push_back(
            make_record(system_id, Method::All, variant, variant.positions[i], words[i]));
    }
    return result;
}

MethodResult predict_one_by_one(TextBackend& backend, const VariantInput& input,
                                const SamplingParams& params, const std::string& system_id,
                                const Placeholders& ph) {
    const auto& variant = input.variant;
    const auto prompts = build_prompts_one_by_one(input.words, variant, ph);
    MethodResult result;
    for (const auto& prompt : prompts) {
        const std::size_t position = *prompt.target_position;
        SamplingParams call_params = params;
        call_params.seed = mix_seed(params.seed, static_cast<std::uint64_t>(position));
        std::string predicted;
        try {
            predicted = first_token_normalized(backend.generate(prompt.text, call_params));
        } catch (const std::runtime_error&) {
            ++result.failures;
        }
        result.records.push_back(
            make_record(system_id, Method::OneByOne, variant, position, std::move(predicted)));
    }
    return result;
}

ForceDecodeResult force_decode_word(const ScoredBackend& backend,
                                    std::span<const std::uint32_t> context,
                                    const std::unordered_set<std::uint32_t>& banned) {
    const SubwordVocab& vocab = backend.vocab();
    std::vector<std::uint32_t> ctx(context.begin(), context.end());

    auto dist = backend.next_distribution(ctx);
    std::uint32_t first = SubwordVocab::kNotFound;
    for (std::uint32_t id = 0; id < vocab.size(); ++id) {
        if (!vocab.begins_word(id) || banned.count(id)) continue;
        if (first == SubwordVocab::kNotFound || dist[id] > dist[first]) first = id;
    }
    if (first == SubwordVocab::kNotFound) {
        throw DecodeError("force_decode_word: every word-initial subword is banned");
    }

    ForceDecodeResult result;
    result.word = vocab.text(first);
    result.ids.push_back(first);
    ctx.push_back(first);

    while (result.ids.size() < kMaxWordSubwords) {
        dist = backend.next_distribution(ctx);
        std::uint32_t best = 0;
        for (std::uint32_t id = 1; id < vocab.size(); ++id) {
            if (dist[id] > dist[best]) best = id;
        }
        if (vocab.begins_word(best) || best == vocab.eot_id()) break;  // word boundary, discarded
        result.word += vocab.text(best);
        result.ids.push_back(best);
        ctx.push_back(best);
    }
    return result;
}

MethodResult predict_restore(const ScoredBackend& backend, const VariantInput& input,
                             const SamplingParams& /*params: restore is greedy*/,
                             const std::string& system_id, bool ban_mask_token) {
    const auto& variant = input.variant;
    const SubwordVocab& vocab = backend.vocab();
    const PromptInstance prompt = build_prompt_restore(input.words, variant);

    std::vector<std::uint32_t> ctx = tokenize_text(vocab, prompt.text);
    std::unordered_set<std::uint32_t> banned;
    if (ban_mask_token) banned.insert(vocab.mask_id());

    MethodResult result;
    std::size_t next_mask = 0;
    for (std::size_t i = 0; i < input.words.size(); ++i) {
        if (next_mask < variant.positions.size() && variant.positions[next_mask] == i) {
            const ForceDecodeResult decoded = force_decode_word(backend, ctx, banned);
            ctx.insert(ctx.end(), decoded.ids.begin(), decoded.ids.end());
            result.records.push_back(
                make_record(system_id, Method::Restore, variant, i, decoded.word));
            ++next_mask;
        } else {
            const auto ids = tokenize_word(vocab, input.words[i]);
            ctx.insert(ctx.end(), ids.begin(), ids.end());
        }
    }
    if (next_mask != variant.positions.size()) {
        throw IngestError("restore: masked position " +
                          std::to_string(variant.positions[next_mask]) +
                          " lies beyond the document for doc_id=" + variant.doc_id);
    }
    return result;
}

void sort_canonical(std::vector<PredictionRecord>& records) {
    std::sort(records.begin(), records.end(),
              [](const PredictionRecord& a, const PredictionRecord& b) {
                  if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
                  if (a.variant_id != b.variant_id) return a.variant_id < b.variant_id;
                  return a.position < b.position;
              });
}

}  // namespace lacuna
