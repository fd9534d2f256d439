#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "phenomine/cohort.hpp"
#include "phenomine/extraction.hpp"
#include "phenomine/llm_gateway.hpp"
#include "phenomine/stats.hpp"

namespace phenomine {

struct RunConfig {
    // Inputs
    std::filesystem::path notes;
    std::filesystem::path diagnoses;
    std::filesystem::path manifest;
    std::filesystem::path prescriptions;
    std::filesystem::path medications;
    std::filesystem::path matrix;
    std::vector<std::filesystem::path> fixtures;
    std::filesystem::path dictionary;
    std::filesystem::path ner_annotations;

    // Outputs
    std::filesystem::path out_dir = "phenomine_out";
    std::filesystem::path cache_dir;

    // Phenotype list and prompting
    std::string list = "list1";
    PromptMode mode = PromptMode::ZeroShot;
    std::size_t chunk_budget = 2048;
    std::size_t context_limit = 131072;

    // Backend
    std::string backend = "mock";
    std::string base_url;
    std::string api_key;
    std::string model = std::string(kDefaultModel);
    double temperature = 0.0;
    int max_output_tokens = 64;
    std::size_t max_in_flight = 8;
    int retry_attempts = 3;
    int retry_base_ms = 1000;
    std::filesystem::path mock_rules;

    // Cohorts and sampling
    std::uint64_t seed = 7;
    std::optional<std::size_t> sample_per_cohort;
    std::optional<std::size_t> cn_downsample;
    int cn_draws = 1;
    double cn_min_age = 40.0;
    double cn_min_history_years = 1.0;
    bool patient_level = false;

    // Statistics
    Granularity granularity = Granularity::Category;
    YatesMode yates = YatesMode::Auto;

    // Clustering
    std::vector<std::size_t> ks = {2, 3};
    std::string label_scheme = "auto";
    int restarts = 10;
    int max_iter = 300;
    double tol = 1e-4;

    // Baselines
    std::size_t min_term_length = 4;
    std::size_t min_doc_freq = 50;
    double similarity_threshold = 1.0;
    double min_ner_score = 0.8;
};

/// Hash over semantic parameters and input file contents; output and cache
/// locations are excluded.
std::string config_hash(const RunConfig& config);
/// One-line provenance stamp embedded in every artifact.
std::string provenance_line(const RunConfig& config);

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitExtractionFailures = 2;

struct CohortStage {
    CohortManifest manifest;
    std::vector<NoteRecord> notes;  // manifest order
};

/// Builds (or reads) the manifest, applies sampling, and joins note texts.
CohortStage run_cohort_stage(const RunConfig& config);

struct ExtractStage {
    CohortStage cohort;
    FeatureMatrix matrix;
    ExtractionRun run;
    GatewayStats gateway;
};

/// Cohort, chunk, prompt, complete, parse, matrix. The first request is sent
/// on its own so an unusable backend fails before any artifact is written.
ExtractStage run_extract_stage(const RunConfig& config);

// Subcommands. Each writes its artifacts under config.out_dir and returns an
// exit code; errors propagate as exceptions.
int cmd_cohort(const RunConfig& config);
int cmd_extract(const RunConfig& config);
int cmd_stats(const RunConfig& config);
int cmd_cluster(const RunConfig& config);
int cmd_pca(const RunConfig& config);
int cmd_baseline(const RunConfig& config);
/// extract, then stats, cluster and pca over the fresh matrix.
int cmd_report(const RunConfig& config);
int cmd_export_defaults(const RunConfig& config);

}  // namespace phenomine
