#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "phenomine/cohort.hpp"
#include "phenomine/extraction.hpp"

namespace phenomine {

struct ConceptDictionary {
    /// Normalized term (lowercase word tokens joined by one space) -> concept id.
    std::unordered_map<std::string, std::string> terms;
    std::size_t min_term_length = 4;
    std::vector<std::string> warnings;
};

/// Builds from a CSV `term,concept_id`. Terms of min_term_length characters or
/// fewer are discarded; a repeated term keeps its first concept.
ConceptDictionary build_dictionary(const std::filesystem::path& term_file, std::size_t min_term_length = 4);
ConceptDictionary build_dictionary(const std::vector<std::pair<std::string, std::string>>& entries,
                                   std::size_t min_term_length = 4);

struct DictionaryOptions {
    std::size_t min_doc_freq = 50;
    /// 1.0 is exact n-gram match; below that, token-set Jaccard.
    double similarity_threshold = 1.0;
    std::size_t max_ngram = 5;
};

/// Rows follow `notes`; columns are concept ids seen in at least min_doc_freq
/// notes, sorted. `doc_freq` receives per-concept note counts before filtering.
FeatureMatrix extract_dictionary_features(const std::vector<NoteRecord>& notes, const ConceptDictionary& dict,
                                          const DictionaryOptions& options = {},
                                          std::map<std::string, std::size_t>* doc_freq = nullptr);

struct NerAnnotation {
    std::string note_id;
    std::string concept_id;
    double score = 0.0;
};

struct NerIngestResult {
    FeatureMatrix matrix;
    std::size_t kept = 0;
    std::size_t below_threshold = 0;
    std::vector<std::string> warnings;
};

/// JSONL `{note_id, concept, score}`. Rows follow the manifest when given
/// (unannotated notes stay all-zero), else first appearance. Columns sorted.
NerIngestResult ingest_ner_annotations(const std::filesystem::path& path, double min_score = 0.8,
                                       const CohortManifest* manifest = nullptr);

}  // namespace phenomine
