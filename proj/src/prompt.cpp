#include "phenomine/prompt.hpp"

#include "phenomine/error.hpp"
#include "phenomine/text.hpp"

namespace phenomine {

std::string_view to_string(PromptMode m) { return m == PromptMode::ZeroShot ? "zero_shot" : "few_shot"; }

PromptMode parse_prompt_mode(std::string_view s) {
    auto v = text::to_lower(s);
    for (auto& c : v) {
        if (c == '-') c = '_';
    }
    if (v == "zero_shot" || v == "zeroshot") return PromptMode::ZeroShot;
    if (v == "few_shot" || v == "fewshot") return PromptMode::FewShot;
    throw ConfigError("unknown prompting mode '" + std::string(s) + "' (expected zero_shot or few_shot)");
}

std::string join_candidates(const std::vector<Phenotype>& candidates) {
    std::string out;
    const std::size_t n = candidates.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            if (n == 2) out += " and ";
            else if (i + 1 == n) out += ", and ";
            else out += ", ";
        }
        out += "'" + text::to_lower(candidates[i].display_name) + "'";
    }
    return out;
}

std::string render_instruction(const PhenotypeCategory& category) {
    return "You are analyzing a segment of a clinical nursing note. Extract the patient's " +
           category.prompt_phrase() + " from the given discharge note. Please choose from " +
           join_candidates(category.candidates) +
           ". Return only the combination of the above outputs or 'none' if none are mentioned in the note.";
}

std::string render_zero_shot(const PhenotypeCategory& category, std::string_view chunk_text) {
    return render_instruction(category) + " " + std::string(kNoteMarker) + " " + std::string(chunk_text);
}

std::string render_few_shot(const PhenotypeCategory& category, std::string_view chunk_text) {
    if (category.few_shot_examples.empty()) {
        throw ConfigError("few-shot prompting requested but category '" + category.name + "' has no examples");
    }
    std::string out = render_instruction(category) + "\nExamples:\n";
    for (const auto& ex : category.few_shot_examples) {
        out += "Note: " + ex.note_excerpt + "\nOutput: " + ex.expected_output + "\n";
    }
    out += std::string(kNoteMarker) + " " + std::string(chunk_text);
    return out;
}

std::string render_prompt(const PhenotypeCategory& category, std::string_view chunk_text, PromptMode mode) {
    return mode == PromptMode::ZeroShot ? render_zero_shot(category, chunk_text)
                                        : render_few_shot(category, chunk_text);
}

}  // namespace phenomine
