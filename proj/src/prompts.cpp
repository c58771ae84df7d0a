#include "lacuna/prompts.hpp"

#include "lacuna/errors.hpp"

namespace lacuna {

std::string method_name(Method m) {
    switch (m) {
        case Method::All: return "all";
        case Method::OneByOne: return "one-by-one";
        case Method::Restore: return "restore";
    }
    throw std::invalid_argument("method_name: bad enum value");
}

Method method_from_name(const std::string& name) {
    if (name == "all") return Method::All;
    if (name == "one-by-one") return Method::OneByOne;
    if (name == "restore") return Method::Restore;
    throw ConfigError("unknown method \"" + name + "\" (expected all|one-by-one|restore)");
}

std::string method_display_name(Method m) {
    switch (m) {
        case Method::All: return "All";
        case Method::OneByOne: return "One by one";
        case Method::Restore: return "Restore";
    }
    throw std::invalid_argument("method_display_name: bad enum value");
}

namespace {

void require_masks(const MaskedVariant& variant) {
    if (variant.positions.empty()) {
        throw ConfigError("prompt construction requires at least one masked position (doc_id=" +
                          variant.doc_id + ")");
    }
}

}  // namespace

PromptInstance build_prompt_all(const std::vector<std::string>& masked,
                                const MaskedVariant& variant) {
    require_masks(variant);
    PromptInstance p;
    p.method = Method::All;
    p.doc_id = variant.doc_id;
    p.variant_id = variant.variant_id;
    p.text = "Fill in the missing " + variant.language +
             " words, masked by the [MASK] token. Output \"WORDS:\" and a comma-separated list "
             "of the missing words in original " +
             variant.language + ": " + join_words(masked);
    return p;
}

std::vector<PromptInstance> build_prompts_one_by_one(const std::vector<std::string>& masked,
                                                     const MaskedVariant& variant,
                                                     const Placeholders& ph) {
    require_masks(variant);
    std::vector<PromptInstance> prompts;
    prompts.reserve(variant.positions.size());
    for (std::size_t i = 0; i < variant.positions.size(); ++i) {
        std::vector<std::string> words = masked;
        for (std::size_t j = 0; j < variant.positions.size(); ++j) {
            if (j != i) words[variant.positions[j]] = ph.unk;
        }
        PromptInstance p;
        p.method = Method::OneByOne;
        p.doc_id = variant.doc_id;
        p.variant_id = variant.variant_id;
        p.target_position = variant.positions[i];
        p.text = "Fill in the missing " + variant.language +
                 " word masked by the [MASK] token: " + join_words(words);
        prompts.push_back(std::move(p));
    }
    return prompts;
}

PromptInstance build_prompt_restore(const std::vector<std::string>& masked,
                                    const MaskedVariant& variant) {
    require_masks(variant);
    PromptInstance p;
    p.method = Method::Restore;
    p.doc_id = variant.doc_id;
    p.variant_id = variant.variant_id;
    p.text = "Complete the missing " + variant.language +
             " words masked by the [MASK] tokens and print out the restored document: " +
             join_words(masked);
    return p;
}

}  // namespace lacuna
