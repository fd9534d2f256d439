#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "phenomine/chunker.hpp"
#include "phenomine/phenotype_schema.hpp"

namespace phenomine {

enum class PromptMode { ZeroShot, FewShot };

std::string_view to_string(PromptMode m);
/// "zero_shot" / "few_shot" (hyphens accepted).
PromptMode parse_prompt_mode(std::string_view s);

/// Marker that precedes the note payload in every prompt.
inline constexpr std::string_view kNoteMarker = "##Note##:";

/// 'a'; 'a' and 'b'; 'a', 'b', and 'c'. Names are lowercased.
std::string join_candidates(const std::vector<Phenotype>& candidates);

/// Instruction sentence block shared by both modes (no examples, no note).
std::string render_instruction(const PhenotypeCategory& category);

std::string render_zero_shot(const PhenotypeCategory& category, std::string_view chunk_text);
/// Throws ConfigError when the category has no examples.
std::string render_few_shot(const PhenotypeCategory& category, std::string_view chunk_text);
std::string render_prompt(const PhenotypeCategory& category, std::string_view chunk_text, PromptMode mode);

}  // namespace phenomine
