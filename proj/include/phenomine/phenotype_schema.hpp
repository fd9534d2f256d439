#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace phenomine {

struct Phenotype {
    std::string id;
    std::string display_name;
    std::vector<std::string> aliases;  // lowercase, deduplicated
};

struct FewShotExample {
    std::string note_excerpt;
    std::string expected_output;
};

struct PhenotypeCategory {
    std::string name;
    /// Phrase substituted into prompts; empty means the lowercase category name.
    std::string phrase;
    /// Namespace of the feature columns this category contributes.
    std::string source_list;
    std::vector<Phenotype> candidates;
    std::vector<FewShotExample> few_shot_examples;

    std::string prompt_phrase() const;
    const Phenotype* find(std::string_view phenotype_id) const;
};

struct PhenotypeList {
    std::string list_id;
    std::vector<PhenotypeCategory> categories;

    std::size_t phenotype_count() const;
    const PhenotypeCategory* find_category(std::string_view name) const;
};

struct FeatureColumn {
    std::size_t column = 0;
    std::string list_id;
    std::string category;
    std::string phenotype_id;

    /// Namespaced column name, `list::category::phenotype`.
    std::string key() const;
};

/// Loads and validates a schema document. Throws SchemaError on malformed
/// JSON or missing fields, ValidationError on invariant violations.
PhenotypeList load_phenotype_list(const std::filesystem::path& path);
PhenotypeList parse_phenotype_list(std::string_view json_text, std::string_view source = "<memory>");
PhenotypeList phenotype_list_from_json(const nlohmann::json& doc, std::string_view source = "<memory>");
nlohmann::json to_json(const PhenotypeList& list);

/// Built-in vocabularies: "list1", "list2" or "combined".
PhenotypeList builtin_list(std::string_view name);
/// Raw embedded schema text for export.
std::string_view builtin_list_json(std::string_view name);

/// Built-in name or path to a schema file.
PhenotypeList resolve_list(std::string_view name_or_path);

void validate(const PhenotypeList& list);

/// Categories of `a` followed by those of `b`. Column namespaces of `b`
/// that clash with `a` get a numeric suffix so every column stays distinct.
PhenotypeList combine_lists(const PhenotypeList& a, const PhenotypeList& b);

std::vector<FeatureColumn> feature_index(const PhenotypeList& list);

}  // namespace phenomine
