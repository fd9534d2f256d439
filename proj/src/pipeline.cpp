#include "phenomine/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "phenomine/baseline.hpp"
#include "phenomine/chunker.hpp"
#include "phenomine/clustering.hpp"
#include "phenomine/error.hpp"
#include "phenomine/pca.hpp"
#include "phenomine/phenotype_schema.hpp"
#include "phenomine/prompt.hpp"
#include "phenomine/text.hpp"

namespace phenomine {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string file_digest(const fs::path& p) {
    if (p.empty()) return "";
    std::ifstream in(p, std::ios::binary);
    if (!in) return "missing";
    std::ostringstream buf;
    buf << in.rdbuf();
    return text::sha256_hex(buf.str());
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
    spdlog::info("wrote {}", path.string());
}

fs::path prepare_out_dir(const RunConfig& config) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec || !fs::is_directory(config.out_dir)) {
        throw IoError("cannot create output directory " + config.out_dir.string());
    }
    return config.out_dir;
}

std::string list_id_of(const RunConfig& config) {
    try {
        return resolve_list(config.list).list_id;
    } catch (const Error&) {
        return config.list;
    }
}

fs::path matrix_input(const RunConfig& config) {
    auto p = config.matrix.empty() ? config.out_dir / "feature_matrix.csv" : config.matrix;
    if (!fs::exists(p)) throw IoError("feature matrix not found: " + p.string());
    return p;
}

LabelScheme scheme_for(const RunConfig& config, std::size_t k) {
    if (config.label_scheme == "auto") return k == 2 ? LabelScheme::CollapsedPatient : LabelScheme::ThreeWay;
    return parse_label_scheme(config.label_scheme);
}

KMeansOptions kmeans_options(const RunConfig& config) {
    KMeansOptions o;
    o.restarts = config.restarts;
    o.max_iter = config.max_iter;
    o.tol = config.tol;
    return o;
}

std::vector<ClusteringReport> cluster_matrix(const RunConfig& config, const FeatureMatrix& matrix,
                                             const std::string& list_id, const std::string& mode) {
    std::vector<ClusteringReport> reports;
    for (auto k : config.ks) {
        auto r = evaluate_clustering(matrix, k, scheme_for(config, k), config.seed, kmeans_options(config));
        r.list_id = list_id;
        r.prompting_mode = mode;
        reports.push_back(std::move(r));
    }
    return reports;
}

void write_stats(const RunConfig& config, const StatsReport& report) {
    const auto dir = prepare_out_dir(config);
    const auto prov = provenance_line(config);
    write_text(dir / "stats_report.csv", stats_report_csv(report, prov));
    const auto text = stats_report_text(report);
    write_text(dir / "stats_report.txt", "# " + prov + "\n" + text);
    std::cout << text;
}

void write_clusters(const RunConfig& config, const std::vector<ClusteringReport>& reports,
                    const std::string& stem) {
    const auto dir = prepare_out_dir(config);
    const auto prov = provenance_line(config);
    write_text(dir / (stem + ".json"), clustering_reports_json(reports, prov));
    const auto text = clustering_reports_text(reports);
    write_text(dir / (stem + ".txt"), "# " + prov + "\n" + text);
    std::cout << text;
}

void write_pca(const RunConfig& config, const FeatureMatrix& matrix) {
    const auto dir = prepare_out_dir(config);
    const auto prov = provenance_line(config);
    auto pca = pca_project(matrix);
    write_text(dir / "pca_scatter.csv", pca_scatter_csv(matrix, pca, prov));
    const auto title = "PCA of phenotype features (" + list_id_of(config) + ", " +
                       std::string(to_string(config.mode)) + ")";
    write_text(dir / "pca_scatter.svg", pca_scatter_svg(matrix, pca, title, prov));
}

std::shared_ptr<CompletionBackend> make_backend(const RunConfig& config, const PhenotypeList& list) {
    if (config.backend == "mock") {
        if (config.mock_rules.empty()) throw ConfigError("the mock backend needs --mock-rules");
        return std::make_shared<MockBackend>(MockRuleTable::load(config.mock_rules), list);
    }
    if (config.backend == "http") {
        if (config.base_url.empty()) throw ConfigError("the http backend needs --base-url");
        HttpBackendConfig hc;
        hc.base_url = config.base_url;
        hc.api_key = config.api_key;
        return std::make_shared<HttpBackend>(hc);
    }
    throw ConfigError("backend must be http or mock, got '" + config.backend + "'");
}

}  // namespace

std::string config_hash(const RunConfig& c) {
    ojson j;
    j["list"] = to_json(resolve_list(c.list));
    j["mode"] = to_string(c.mode);
    j["chunk_budget"] = c.chunk_budget;
    j["context_limit"] = c.context_limit;
    j["backend"] = c.backend;
    j["base_url"] = c.base_url;
    j["model"] = c.model;
    j["temperature"] = c.temperature;
    j["max_output_tokens"] = c.max_output_tokens;
    j["seed"] = c.seed;
    j["sample_per_cohort"] = c.sample_per_cohort ? static_cast<long long>(*c.sample_per_cohort) : -1;
    j["cn_downsample"] = c.cn_downsample ? static_cast<long long>(*c.cn_downsample) : -1;
    j["cn_draws"] = c.cn_draws;
    j["cn_min_age"] = c.cn_min_age;
    j["cn_min_history_years"] = c.cn_min_history_years;
    j["patient_level"] = c.patient_level;
    j["granularity"] = c.granularity == Granularity::Category ? "category" : "phenotype";
    j["yates"] = c.yates == YatesMode::Auto ? "auto" : (c.yates == YatesMode::On ? "on" : "off");
    j["ks"] = c.ks;
    j["label_scheme"] = c.label_scheme;
    j["restarts"] = c.restarts;
    j["max_iter"] = c.max_iter;
    j["tol"] = c.tol;
    j["min_term_length"] = c.min_term_length;
    j["min_doc_freq"] = c.min_doc_freq;
    j["similarity_threshold"] = c.similarity_threshold;
    j["min_ner_score"] = c.min_ner_score;
    ojson inputs;
    inputs["notes"] = file_digest(c.notes);
    inputs["diagnoses"] = file_digest(c.diagnoses);
    inputs["manifest"] = file_digest(c.manifest);
    inputs["prescriptions"] = file_digest(c.prescriptions);
    inputs["medications"] = file_digest(c.medications);
    inputs["matrix"] = file_digest(c.matrix);
    inputs["mock_rules"] = file_digest(c.mock_rules);
    inputs["dictionary"] = file_digest(c.dictionary);
    inputs["ner_annotations"] = file_digest(c.ner_annotations);
    for (const auto& f : c.fixtures) inputs["fixtures"].push_back(file_digest(f));
    j["inputs"] = std::move(inputs);
    return text::sha256_hex(j.dump());
}

std::string provenance_line(const RunConfig& c) {
    return "phenomine config=" + config_hash(c).substr(0, 16) + " seed=" + std::to_string(c.seed) +
           " list=" + list_id_of(c) + " mode=" + std::string(to_string(c.mode));
}

CohortStage run_cohort_stage(const RunConfig& config) {
    if (config.notes.empty()) throw ConfigError("--notes is required");
    auto notes = read_notes(config.notes);

    CohortStage stage;
    if (!config.manifest.empty()) {
        stage.manifest = read_manifest(config.manifest);
    } else {
        if (config.diagnoses.empty()) throw ConfigError("either --manifest or --diagnoses is required");
        LoadWarnings warnings;
        auto diagnoses = read_diagnoses(config.diagnoses, &warnings);
        for (const auto& w : warnings.messages) spdlog::warn("{}", w);
        std::vector<std::string> medicated;
        if (!config.prescriptions.empty()) {
            auto meds = config.medications.empty() ? default_dementia_medications()
                                                   : read_medication_list(config.medications);
            medicated = patients_on_medications(config.prescriptions, meds);
        }
        stage.manifest =
            build_manifest(notes, diagnoses, medicated, CnCriteria{config.cn_min_age, config.cn_min_history_years});
    }
    if (config.cn_downsample) {
        stage.manifest =
            downsample_cohort(stage.manifest, Cohort::CN, *config.cn_downsample, config.cn_draws, config.seed);
    }
    if (config.sample_per_cohort) {
        for (Cohort c : {Cohort::CN, Cohort::ADRD}) {
            stage.manifest = sample_cohort(stage.manifest, c, *config.sample_per_cohort, config.seed);
        }
    }
    stage.manifest.seed = config.seed;

    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < notes.size(); ++i) by_id.emplace(notes[i].note_id, i);
    for (const auto& e : stage.manifest.entries) {
        auto it = by_id.find(e.note_id);
        if (it == by_id.end()) throw ValidationError("manifest note '" + e.note_id + "' not found in notes file");
        auto note = notes[it->second];
        note.cohort = e.cohort;
        stage.notes.push_back(std::move(note));
    }
    spdlog::info("manifest: CN {} / MCI {} / ADRD {}", stage.manifest.count(Cohort::CN),
                 stage.manifest.count(Cohort::MCI), stage.manifest.count(Cohort::ADRD));
    return stage;
}

ExtractStage run_extract_stage(const RunConfig& config) {
    const auto list = resolve_list(config.list);
    ExtractStage stage;
    stage.cohort = run_cohort_stage(config);
    if (stage.cohort.notes.empty()) throw ValidationError("no labeled notes to extract from");

    ExtractionOptions options;
    options.mode = config.mode;
    options.chunking.budget = config.chunk_budget;
    options.chunking.context_limit = config.context_limit;
    options.model = config.model;
    options.temperature = config.temperature;
    options.max_output_tokens = config.max_output_tokens;
    options.max_in_flight = config.max_in_flight;
    if (options.max_in_flight < 1) throw ConfigError("--max-in-flight must be >= 1");

    RetryPolicy retry;
    retry.max_attempts = config.retry_attempts;
    retry.base_delay = std::chrono::milliseconds(config.retry_base_ms);
    std::optional<fs::path> cache;
    if (!config.cache_dir.empty()) cache = config.cache_dir;
    Gateway gateway(make_backend(config, list), cache, retry);

    // Preflight.
    {
        const auto& first = stage.cohort.notes.front();
        auto chunks = chunk_note(first.note_id, first.text, options.chunking);
        CompletionRequest req;
        req.model = options.model;
        req.temperature = options.temperature;
        req.max_output_tokens = options.max_output_tokens;
        req.prompt = render_prompt(list.categories.front(), chunks.front().text, options.mode);
        gateway.complete(req);
    }

    stage.run = extract_notes(stage.cohort.notes, list, gateway, options);
    stage.matrix = build_feature_matrix(stage.run.profiles, list, stage.cohort.manifest);
    if (config.patient_level) stage.matrix = aggregate_by_patient(stage.matrix);
    stage.gateway = gateway.stats();
    return stage;
}

int cmd_cohort(const RunConfig& config) {
    auto stage = run_cohort_stage(config);
    const auto dir = prepare_out_dir(config);
    write_manifest(stage.manifest, dir / "manifest.csv", provenance_line(config));
    for (const auto& [cohort, n] : stage.manifest.counts()) std::cout << to_string(cohort) << '\t' << n << '\n';
    return kExitOk;
}

namespace {

int write_extraction(const RunConfig& config, const ExtractStage& stage) {
    const auto dir = prepare_out_dir(config);
    const auto prov = provenance_line(config);
    write_manifest(stage.cohort.manifest, dir / "manifest.csv", prov);
    write_feature_matrix(stage.matrix, dir / "feature_matrix.csv", prov);
    write_reject_log(stage.run.profiles, dir / "reject_log.jsonl");

    ojson report;
    report["provenance"] = prov;
    report["backend"] = config.backend;
    report["model"] = config.model;
    ojson counts;
    for (Cohort c : {Cohort::CN, Cohort::MCI, Cohort::ADRD}) {
        counts[std::string(to_string(c))] = stage.cohort.manifest.count(c);
    }
    report["cohort_counts"] = counts;
    report["notes"] = stage.cohort.notes.size();
    report["chunks"] = stage.run.chunks;
    report["requests"] = stage.run.requests;
    report["failed_requests"] = stage.run.failed_requests;
    report["cache_hits"] = stage.gateway.cache_hits;
    report["cache_hit_rate"] = stage.gateway.requests == 0 ? 0.0
                                                           : static_cast<double>(stage.gateway.cache_hits) /
                                                                 static_cast<double>(stage.gateway.requests);
    report["retries"] = stage.gateway.retries;
    report["estimated_prompt_tokens"] = stage.run.estimated_prompt_tokens;
    ojson incomplete = ojson::array();
    std::size_t rejected = 0;
    for (const auto& p : stage.run.profiles) {
        if (!p.incomplete.empty()) incomplete.push_back(p.note_id);
        rejected += p.reject_log.size();
    }
    report["incomplete_notes"] = incomplete;
    report["rejected_tokens"] = rejected;
    report["matrix_rows"] = stage.matrix.row_count();
    report["matrix_columns"] = stage.matrix.column_count();
    write_text(dir / "run_report.json", report.dump(2) + "\n");

    std::cout << "notes " << stage.cohort.notes.size() << ", requests " << stage.run.requests << ", failed "
              << stage.run.failed_requests << ", cache hits " << stage.gateway.cache_hits << '\n';
    if (stage.run.failed_requests > 0) {
        spdlog::error("{} completions failed; affected notes listed in run_report.json", stage.run.failed_requests);
        return kExitExtractionFailures;
    }
    return kExitOk;
}

}  // namespace

int cmd_extract(const RunConfig& config) { return write_extraction(config, run_extract_stage(config)); }

int cmd_stats(const RunConfig& config) {
    StatsReport report;
    if (!config.fixtures.empty()) {
        std::vector<CategoryCounts> all;
        for (const auto& f : config.fixtures) {
            auto part = read_counts_fixture(f);
            all.insert(all.end(), part.begin(), part.end());
        }
        report = analyze_all(all, config.yates);
    } else {
        report = analyze_all(read_feature_matrix(matrix_input(config)), config.yates, config.granularity);
    }
    write_stats(config, report);
    return kExitOk;
}

int cmd_cluster(const RunConfig& config) {
    auto matrix = read_feature_matrix(matrix_input(config));
    write_clusters(config, cluster_matrix(config, matrix, list_id_of(config), std::string(to_string(config.mode))),
                   "clustering");
    return kExitOk;
}

int cmd_pca(const RunConfig& config) {
    write_pca(config, read_feature_matrix(matrix_input(config)));
    return kExitOk;
}

int cmd_baseline(const RunConfig& config) {
    if (config.dictionary.empty() && config.ner_annotations.empty()) {
        throw ConfigError("baseline needs --dictionary and/or --ner-annotations");
    }
    const auto dir = prepare_out_dir(config);
    const auto prov = provenance_line(config);
    std::vector<ClusteringReport> reports;
    auto cluster_if_possible = [&](const FeatureMatrix& m, const std::string& name) {
        if (m.column_count() == 0) {
            spdlog::warn("{} baseline produced no feature columns; clustering skipped", name);
            return;
        }
        for (const auto& row : m.rows) {
            if (row.cohort == Cohort::Unlabeled) {
                spdlog::warn("{} baseline rows lack cohort labels; clustering skipped", name);
                return;
            }
        }
        auto r = cluster_matrix(config, m, name, "baseline");
        reports.insert(reports.end(), r.begin(), r.end());
    };

    std::optional<CohortStage> cohort;
    if (!config.notes.empty()) cohort = run_cohort_stage(config);

    if (!config.dictionary.empty()) {
        if (!cohort) throw ConfigError("the dictionary baseline needs --notes");
        auto dict = build_dictionary(config.dictionary, config.min_term_length);
        DictionaryOptions opts;
        opts.min_doc_freq = config.min_doc_freq;
        opts.similarity_threshold = config.similarity_threshold;
        std::map<std::string, std::size_t> df;
        auto m = extract_dictionary_features(cohort->notes, dict, opts, &df);
        spdlog::info("dictionary: {} terms, {} concepts matched, {} kept at min_doc_freq {}", dict.terms.size(),
                     df.size(), m.column_count(), config.min_doc_freq);
        write_feature_matrix(m, dir / "dictionary_matrix.csv", prov);
        cluster_if_possible(m, "dictionary");
    }
    if (!config.ner_annotations.empty()) {
        std::optional<CohortManifest> manifest;
        if (cohort) manifest = cohort->manifest;
        else if (!config.manifest.empty()) manifest = read_manifest(config.manifest);
        auto res = ingest_ner_annotations(config.ner_annotations, config.min_ner_score,
                                          manifest ? &*manifest : nullptr);
        spdlog::info("ner: kept {} annotations, {} below score {}", res.kept, res.below_threshold,
                     config.min_ner_score);
        write_feature_matrix(res.matrix, dir / "ner_matrix.csv", prov);
        cluster_if_possible(res.matrix, "ner");
    }
    if (!reports.empty()) write_clusters(config, reports, "clustering_baseline");
    return kExitOk;
}

int cmd_report(const RunConfig& config) {
    auto stage = run_extract_stage(config);
    const int code = write_extraction(config, stage);
    write_stats(config, analyze_all(stage.matrix, config.yates, config.granularity));
    write_clusters(config, cluster_matrix(config, stage.matrix, list_id_of(config),
                                          std::string(to_string(config.mode))),
                   "clustering");
    write_pca(config, stage.matrix);
    return code;
}

int cmd_export_defaults(const RunConfig& config) {
    const auto dir = prepare_out_dir(config);
    for (const char* name : {"list1", "list2", "combined"}) {
        write_text(dir / (std::string(name) + ".json"), to_json(builtin_list(name)).dump(2) + "\n");
    }
    std::ostringstream meds;
    meds << "# one drug name per line, matched as a case-insensitive substring\n";
    for (const auto& m : default_dementia_medications()) meds << m << '\n';
    write_text(dir / "dementia_medications.txt", meds.str());
    return kExitOk;
}

}  // namespace phenomine
