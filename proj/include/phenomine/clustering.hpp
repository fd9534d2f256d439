#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phenomine/extraction.hpp"

namespace phenomine {

/// Dense row-major real matrix used by the analysis routines.
struct Points {
    std::size_t rows = 0;
    std::size_t dims = 0;
    std::vector<double> values;

    std::span<const double> row(std::size_t r) const { return {values.data() + r * dims, dims}; }
    static Points from_matrix(const FeatureMatrix& m);
    static Points from_rows(const std::vector<std::vector<double>>& rows);
};

struct KMeansOptions {
    std::size_t k = 2;
    std::uint64_t seed = 0;
    int restarts = 10;
    int max_iter = 300;
    double tol = 1e-4;
};

struct KMeansModel {
    std::size_t k = 0;
    std::vector<std::vector<double>> centroids;
    std::vector<int> assignments;
    double inertia = 0.0;
    std::uint64_t seed = 0;
    int iterations_run = 0;
    /// Inertia after each assignment step of the returned run.
    std::vector<double> inertia_history;
    std::size_t restart_index = 0;
};

/// One k-means++ seeded Lloyd run.
KMeansModel kmeans_single_run(const Points& points, std::size_t k, std::uint64_t seed, int max_iter, double tol);
/// Lowest-inertia model over `restarts` runs; ties go to the earliest restart.
KMeansModel kmeans_fit(const Points& points, const KMeansOptions& options);

double adjusted_rand_index(std::span<const int> labels_true, std::span<const int> labels_pred);
/// Arithmetic-mean normalization with natural logs.
double normalized_mutual_information(std::span<const int> labels_true, std::span<const int> labels_pred);
double fowlkes_mallows_index(std::span<const int> labels_true, std::span<const int> labels_pred);

enum class LabelScheme { ThreeWay, CollapsedPatient };
std::string_view to_string(LabelScheme s);
LabelScheme parse_label_scheme(std::string_view s);
/// CN/MCI/ADRD as 0/1/2, or CN 0 and MCI+ADRD 1.
std::vector<int> truth_labels(const FeatureMatrix& matrix, LabelScheme scheme);

struct ClusteringReport {
    std::size_t k = 0;
    LabelScheme scheme = LabelScheme::ThreeWay;
    std::string prompting_mode;
    std::string list_id;
    std::uint64_t seed = 0;
    double ari = 0.0;
    double nmi = 0.0;
    double fmi = 0.0;
    std::vector<std::size_t> cluster_sizes;
    double inertia = 0.0;
    std::vector<int> assignments;
};

ClusteringReport evaluate_clustering(const FeatureMatrix& matrix, std::size_t k, LabelScheme scheme,
                                     std::uint64_t seed, const KMeansOptions& base = {});
/// Same over arbitrary real points with caller-supplied truth labels.
ClusteringReport evaluate_clustering(const Points& points, const std::vector<int>& truth, std::size_t k,
                                     std::uint64_t seed, const KMeansOptions& base = {});

/// Human-readable setting label, e.g. "list1 few_shot k=3 three_way".
std::string setting_label(const ClusteringReport& r);
/// `{"provenance": ..., "results": [{setting, ari, nmi, fmi, cluster_sizes, seed}, ...]}`.
std::string clustering_reports_json(const std::vector<ClusteringReport>& reports, const std::string& provenance = {});
/// Method | K | ARI | NMI | FMI grid.
std::string clustering_reports_text(const std::vector<ClusteringReport>& reports);

}  // namespace phenomine
