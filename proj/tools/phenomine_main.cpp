#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "phenomine/error.hpp"
#include "phenomine/pipeline.hpp"

using namespace phenomine;

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("phenomine"));
    spdlog::set_pattern("[%l] %v");

    CLI::App app{"phenomine: phenotype mining from clinical notes"};
    app.set_config("--config", "", "TOML/INI file whose keys mirror the long flag names");
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    std::string mode = "zero_shot";
    std::string granularity = "category";
    std::string yates = "auto";
    std::size_t sample_per_cohort = 0;
    std::size_t cn_downsample = 0;
    std::string log_level = "info";

    app.add_option("--notes", cfg.notes, "Notes CSV or JSONL");
    app.add_option("--diagnoses", cfg.diagnoses, "Diagnoses CSV patient_id,icd_version,icd_code");
    app.add_option("--manifest", cfg.manifest, "Existing manifest CSV (skips cohort labelling)");
    app.add_option("--prescriptions", cfg.prescriptions, "Prescriptions CSV patient_id,drug");
    app.add_option("--medications", cfg.medications, "Dementia medication list (one per line)");
    app.add_option("--matrix", cfg.matrix, "Feature matrix CSV (default <out-dir>/feature_matrix.csv)");
    app.add_option("--fixture", cfg.fixtures, "Counts CSV list,category,cohort,n_total,n_none (repeatable)");
    app.add_option("--dictionary", cfg.dictionary, "Dictionary CSV term,concept_id");
    app.add_option("--ner-annotations", cfg.ner_annotations, "NER annotations JSONL {note_id, concept, score}");
    app.add_option("--out-dir", cfg.out_dir, "Output directory")->capture_default_str();
    app.add_option("--cache-dir", cfg.cache_dir, "Response cache directory");

    app.add_option("--list", cfg.list, "list1, list2, combined or a list JSON file")->capture_default_str();
    app.add_option("--mode", mode, "zero_shot or few_shot")->capture_default_str();
    app.add_option("--chunk-budget", cfg.chunk_budget, "Chunk token budget")->capture_default_str();
    app.add_option("--context-limit", cfg.context_limit, "Model context limit in tokens")->capture_default_str();

    app.add_option("--backend", cfg.backend, "http or mock")->capture_default_str();
    app.add_option("--base-url", cfg.base_url, "Chat-completions service base URL");
    app.add_option("--model", cfg.model, "Model name")->capture_default_str();
    app.add_option("--temperature", cfg.temperature, "Sampling temperature")->capture_default_str();
    app.add_option("--max-output-tokens", cfg.max_output_tokens, "Completion token cap")->capture_default_str();
    app.add_option("--max-in-flight", cfg.max_in_flight, "Concurrent completions")->capture_default_str();
    app.add_option("--retries", cfg.retry_attempts, "Attempts per completion")->capture_default_str();
    app.add_option("--retry-base-ms", cfg.retry_base_ms, "First retry delay in ms")->capture_default_str();
    app.add_option("--mock-rules", cfg.mock_rules, "Mock backend rules CSV category,trigger,phenotype");

    app.add_option("--seed", cfg.seed, "Seed for sampling and clustering")->capture_default_str();
    app.add_option("--sample-per-cohort", sample_per_cohort, "Sample this many CN and ADRD notes (MCI kept whole)");
    app.add_option("--cn-downsample", cn_downsample, "CN draw size");
    app.add_option("--cn-draws", cfg.cn_draws, "Independent CN draws to union")->capture_default_str();
    app.add_option("--cn-min-age", cfg.cn_min_age, "CN age must exceed this")->capture_default_str();
    app.add_option("--cn-min-history", cfg.cn_min_history_years, "CN minimum history in years")->capture_default_str();
    app.add_flag("--patient-level", cfg.patient_level, "OR-aggregate note rows per patient");

    app.add_option("--granularity", granularity, "category or phenotype")->capture_default_str();
    app.add_option("--yates", yates, "auto, on or off")->capture_default_str();

    app.add_option("--k", cfg.ks, "Cluster counts")->delimiter(',')->capture_default_str();
    app.add_option("--label-scheme", cfg.label_scheme, "auto, three_way or collapsed_patient")->capture_default_str();
    app.add_option("--restarts", cfg.restarts, "k-means restarts")->capture_default_str();
    app.add_option("--max-iter", cfg.max_iter, "k-means iteration cap")->capture_default_str();
    app.add_option("--tol", cfg.tol, "k-means centroid shift tolerance")->capture_default_str();

    app.add_option("--min-term-length", cfg.min_term_length, "Dictionary terms must be longer")->capture_default_str();
    app.add_option("--min-doc-freq", cfg.min_doc_freq, "Minimum notes per concept")->capture_default_str();
    app.add_option("--similarity-threshold", cfg.similarity_threshold, "1.0 exact, else Jaccard")->capture_default_str();
    app.add_option("--min-ner-score", cfg.min_ner_score, "Minimum NER confidence")->capture_default_str();
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const RunConfig&);
    };
    const Sub subs[] = {
        {"cohort", "Label cohorts and write the manifest", cmd_cohort},
        {"extract", "Extract phenotypes and write the feature matrix", cmd_extract},
        {"stats", "Chi-square cohort tests from a matrix or counts fixture", cmd_stats},
        {"cluster", "k-means with ARI/NMI/FMI", cmd_cluster},
        {"pca", "2-D PCA scatter (CSV and SVG)", cmd_pca},
        {"baseline", "Dictionary and NER baselines", cmd_baseline},
        {"report", "extract, stats, cluster and pca in one run", cmd_report},
        {"export-defaults", "Write the built-in phenotype lists", cmd_export_defaults},
    };
    for (const auto& s : subs) app.add_subcommand(s.name, s.help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    spdlog::set_level(spdlog::level::from_str(log_level));
    if (const char* key = std::getenv("PHENO_MINE_API_KEY")) cfg.api_key = key;
    if (sample_per_cohort > 0) cfg.sample_per_cohort = sample_per_cohort;
    if (cn_downsample > 0) cfg.cn_downsample = cn_downsample;

    try {
        cfg.mode = parse_prompt_mode(mode);
        cfg.granularity = parse_granularity(granularity);
        cfg.yates = parse_yates_mode(yates);
        for (const auto& s : subs) {
            if (app.got_subcommand(s.name)) return s.fn(cfg);
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitError;
    }
    return kExitError;
}
