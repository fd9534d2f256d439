#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "phenomine/chunker.hpp"
#include "phenomine/cohort.hpp"
#include "phenomine/llm_gateway.hpp"
#include "phenomine/phenotype_schema.hpp"
#include "phenomine/prompt.hpp"

namespace phenomine {

struct ParsedResponse {
    std::set<std::string> ids;
    std::vector<std::string> unknown;
    bool saw_none = false;
};

/// Comma-separated tokens matched exactly (after normalization) against the
/// category's display names and aliases. "none" contributes nothing.
ParsedResponse parse_response(std::string_view text, const PhenotypeCategory& category);

struct RejectEntry {
    std::string note_id;
    std::size_t chunk_index = 0;
    std::string category;
    std::string token;
};

struct ExtractionProfile {
    std::string note_id;
    /// Indexed like PhenotypeList::categories.
    std::vector<std::set<std::string>> present;
    /// Number of chunks that reported each phenotype, per category.
    std::vector<std::map<std::string, int>> provenance;
    std::vector<RejectEntry> reject_log;
    /// (chunk_index, category index) pairs whose completion failed.
    std::vector<std::pair<std::size_t, std::size_t>> incomplete;
    std::size_t chunk_count = 0;

    explicit ExtractionProfile(std::string id = {}, std::size_t categories = 0)
        : note_id(std::move(id)), present(categories), provenance(categories) {}

    /// Union of one chunk's result into the profile.
    void merge(std::size_t category, const std::set<std::string>& ids);
    bool empty() const;
};

struct ExtractionOptions {
    PromptMode mode = PromptMode::ZeroShot;
    ChunkOptions chunking;
    std::string model = std::string(kDefaultModel);
    double temperature = 0.0;
    int max_output_tokens = 64;
    std::size_t max_in_flight = 8;
};

struct ExtractionRun {
    std::vector<ExtractionProfile> profiles;  // input note order
    std::size_t requests = 0;
    std::size_t failed_requests = 0;
    std::size_t chunks = 0;
    std::size_t estimated_prompt_tokens = 0;
};

/// One completion per chunk x category, parsed and unioned per note.
ExtractionRun extract_notes(const std::vector<NoteRecord>& notes, const PhenotypeList& list, Gateway& gateway,
                            const ExtractionOptions& options);
ExtractionProfile extract_note(const NoteRecord& note, const PhenotypeList& list, Gateway& gateway,
                               const ExtractionOptions& options);

struct MatrixRow {
    std::string note_id;
    std::string patient_id;
    Cohort cohort = Cohort::Unlabeled;
};

/// Binary row-major note x feature matrix.
struct FeatureMatrix {
    std::vector<std::string> columns;
    /// Column group, e.g. "list1::Comorbidities"; empty for concept columns.
    std::vector<std::string> groups;
    std::vector<MatrixRow> rows;
    std::vector<std::uint8_t> cells;

    std::size_t row_count() const { return rows.size(); }
    std::size_t column_count() const { return columns.size(); }
    std::uint8_t at(std::size_t r, std::size_t c) const { return cells[r * columns.size() + c]; }
    std::uint8_t& at(std::size_t r, std::size_t c) { return cells[r * columns.size() + c]; }
    /// Column positions of a group; `name` may be the full group or a bare
    /// category name when that is unambiguous. Empty when not found.
    std::vector<std::size_t> group_columns(std::string_view name) const;
    std::vector<std::string> group_names() const;
    std::vector<double> row_as_reals(std::size_t r) const;
};

/// Rows follow manifest order. Throws for a profile whose note is not in the
/// manifest; notes without a profile get an all-zero row.
FeatureMatrix build_feature_matrix(const std::vector<ExtractionProfile>& profiles, const PhenotypeList& list,
                                   const CohortManifest& manifest);

/// One row per patient, OR over that patient's notes; row id is the patient id.
FeatureMatrix aggregate_by_patient(const FeatureMatrix& matrix);

/// CSV `note_id,cohort,<columns>`, optionally preceded by a `# ` provenance line.
void write_feature_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path,
                          const std::string& provenance = {});
std::string feature_matrix_csv(const FeatureMatrix& matrix, const std::string& provenance = {});
FeatureMatrix read_feature_matrix(const std::filesystem::path& path);

/// JSONL `{note_id, chunk_index, category, token}`.
void write_reject_log(const std::vector<ExtractionProfile>& profiles, const std::filesystem::path& path);

}  // namespace phenomine
