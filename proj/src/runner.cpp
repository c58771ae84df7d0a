#include "lacuna/runner.hpp"

#include <exception>
#include <unordered_map>

#include "lacuna/errors.hpp"
#include "lacuna/rng.hpp"

namespace lacuna {

namespace {

std::string variant_salt(const MaskedVariant& variant) {
    return variant.doc_id + "#" + std::to_string(variant.variant_id);
}

// Runs body(i) for each index, serially or under OpenMP. Exceptions from
// parallel iterations are captured and the first one rethrown after the
// region, matching serial behavior.
template <typename Body>
void for_each_index(std::size_t n, ExecutionMode mode, Body&& body) {
    if (mode == ExecutionMode::Serial) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(lacuna_runner_error)
            {
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

ExecutionMode execution_mode_from_name(const std::string& name) {
    if (name == "serial") return ExecutionMode::Serial;
    if (name == "parallel") return ExecutionMode::Parallel;
    throw ConfigError("unknown execution mode \"" + name + "\" (expected serial|parallel)");
}

std::string execution_mode_name(ExecutionMode mode) {
    return mode == ExecutionMode::Serial ? "serial" : "parallel";
}

std::vector<MaskedVariant> mask_corpus(const Corpus& corpus, const MaskingConfig& cfg,
                                       ExecutionMode mode) {
    std::vector<std::vector<MaskedVariant>> slots(corpus.size());
    for_each_index(corpus.size(), mode,
                   [&](std::size_t i) { slots[i] = generate_variants(corpus[i], cfg); });

    std::vector<MaskedVariant> variants;
    for (auto& slot : slots) {
        variants.insert(variants.end(), std::make_move_iterator(slot.begin()),
                        std::make_move_iterator(slot.end()));
    }
    return variants;
}

std::vector<VariantInput> build_variant_inputs(const Corpus& corpus,
                                               const std::vector<MaskedVariant>& variants,
                                               const std::string& mask_placeholder) {
    std::unordered_map<std::string, const Document*> by_id;
    for (const auto& doc : corpus) by_id[doc.doc_id] = &doc;

    std::vector<VariantInput> inputs;
    inputs.reserve(variants.size());
    for (const auto& variant : variants) {
        const auto it = by_id.find(variant.doc_id);
        if (it == by_id.end()) {
            throw ConfigError("variant references unknown doc_id: " + variant.doc_id);
        }
        inputs.push_back(make_variant_input(*it->second, variant, mask_placeholder));
    }
    return inputs;
}

RunResult run_predictions(const std::vector<VariantInput>& inputs, TextBackend* text,
                          const ScoredBackend* scored, const RunOptions& opts) {
    if (opts.method == Method::Restore) {
        if (scored == nullptr) {
            throw ConfigError("restore requires a scored backend (local n-gram model)");
        }
    } else if (text == nullptr) {
        throw ConfigError("method \"" + method_name(opts.method) +
                          "\" requires a text-generation backend");
    }

    std::vector<MethodResult> slots(inputs.size());
    for_each_index(inputs.size(), opts.mode, [&](std::size_t i) {
        const VariantInput& input = inputs[i];
        SamplingParams params = opts.params;
        params.seed = mix_seed(opts.params.seed, variant_salt(input.variant));
        switch (opts.method) {
            case Method::All:
                slots[i] = predict_all(*text, input, params, opts.system_id);
                break;
            case Method::OneByOne:
                slots[i] = predict_one_by_one(*text, input, params, opts.system_id,
                                              opts.placeholders);
                break;
            case Method::Restore:
                slots[i] = predict_restore(*scored, input, params, opts.system_id,
                                           opts.ban_mask_token);
                break;
        }
    });

    RunResult result;
    for (auto& slot : slots) {
        result.failures += slot.failures;
        result.records.insert(result.records.end(),
                              std::make_move_iterator(slot.records.begin()),
                              std::make_move_iterator(slot.records.end()));
    }
    sort_canonical(result.records);
    return result;
}

}  // namespace lacuna
