#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lacuna/masking.hpp"

namespace lacuna {

enum class Method { All, OneByOne, Restore };

std::string method_name(Method m);
Method method_from_name(const std::string& name);
// Human-readable label for report tables ("All", "One by one", "Restore").
std::string method_display_name(Method m);

struct Placeholders {
    std::string mask = "[MASK]";
    std::string unk = "[UNK]";
};

struct PromptInstance {
    Method method = Method::All;
    std::string doc_id;
    std::uint32_t variant_id = 0;
    std::optional<std::size_t> target_position;  // set iff method == OneByOne
    std::string text;
};

// The three prompt templates. `masked` is the document's word sequence with
// placeholders already substituted at the variant's positions.

PromptInstance build_prompt_all(const std::vector<std::string>& masked,
                                const MaskedVariant& variant);

// One prompt per masked position, ascending; position i keeps the mask
// placeholder, every other masked position is swapped to the unk placeholder.
std::vector<PromptInstance> build_prompts_one_by_one(const std::vector<std::string>& masked,
                                                     const MaskedVariant& variant,
                                                     const Placeholders& ph);

PromptInstance build_prompt_restore(const std::vector<std::string>& masked,
                                    const MaskedVariant& variant);

}  // namespace lacuna
