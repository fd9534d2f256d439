#include "phenomine/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "phenomine/error.hpp"
#include "phenomine/random.hpp"
#include "phenomine/text.hpp"

namespace phenomine {

Points Points::from_matrix(const FeatureMatrix& m) {
    Points p;
    p.rows = m.row_count();
    p.dims = m.column_count();
    p.values.assign(m.cells.begin(), m.cells.end());
    return p;
}

Points Points::from_rows(const std::vector<std::vector<double>>& rows) {
    Points p;
    p.rows = rows.size();
    p.dims = rows.empty() ? 0 : rows.front().size();
    p.values.reserve(p.rows * p.dims);
    for (const auto& r : rows) {
        if (r.size() != p.dims) throw ParameterError("rows have different dimensions");
        p.values.insert(p.values.end(), r.begin(), r.end());
    }
    return p;
}

// ---- k-means --------------------------------------------------------------------

namespace {

double sq_dist(std::span<const double> a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void check_points(const Points& points, std::size_t k) {
    if (k < 2) throw ParameterError("k must be >= 2");
    if (points.rows < k) {
        throw ParameterError("k = " + std::to_string(k) + " exceeds the number of rows (" +
                             std::to_string(points.rows) + ")");
    }
    for (double v : points.values) {
        if (!std::isfinite(v)) throw ParameterError("feature matrix contains non-finite values");
    }
}

std::vector<std::vector<double>> kmeanspp_seed(const Points& points, std::size_t k, SeededRng& rng) {
    std::vector<std::vector<double>> centroids;
    auto take = [&](std::size_t r) {
        auto row = points.row(r);
        centroids.emplace_back(row.begin(), row.end());
    };
    take(static_cast<std::size_t>(rng.below(points.rows)));
    std::vector<double> d2(points.rows);
    for (std::size_t r = 0; r < points.rows; ++r) d2[r] = sq_dist(points.row(r), centroids[0]);
    while (centroids.size() < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = 0;
        if (total <= 0.0) {
            pick = static_cast<std::size_t>(rng.below(points.rows));
        } else {
            double target = rng.uniform() * total;
            pick = points.rows - 1;
            for (std::size_t r = 0; r < points.rows; ++r) {
                target -= d2[r];
                if (target < 0.0) {
                    pick = r;
                    break;
                }
            }
        }
        take(pick);
        for (std::size_t r = 0; r < points.rows; ++r) d2[r] = std::min(d2[r], sq_dist(points.row(r), centroids.back()));
    }
    return centroids;
}

// Nearest-centroid assignment (ties to the lowest index), then empty
// clusters take the point farthest from its own centroid. Returns inertia.
double assign(const Points& points, std::vector<std::vector<double>>& centroids, std::vector<int>& labels) {
    const std::size_t k = centroids.size();
    std::vector<double> dist(points.rows);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t r = 0; r < points.rows; ++r) {
        double best = std::numeric_limits<double>::infinity();
        int best_j = 0;
        for (std::size_t j = 0; j < k; ++j) {
            const double d = sq_dist(points.row(r), centroids[j]);
            if (d < best) {
                best = d;
                best_j = static_cast<int>(j);
            }
        }
        labels[r] = best_j;
        dist[r] = best;
        ++sizes[best_j];
    }
    for (std::size_t j = 0; j < k; ++j) {
        if (sizes[j] != 0) continue;
        std::size_t far = points.rows;
        for (std::size_t r = 0; r < points.rows; ++r) {
            if (sizes[labels[r]] > 1 && (far == points.rows || dist[r] > dist[far])) far = r;
        }
        if (far == points.rows) break;
        --sizes[labels[far]];
        labels[far] = static_cast<int>(j);
        ++sizes[j];
        auto row = points.row(far);
        centroids[j].assign(row.begin(), row.end());
        dist[far] = 0.0;
    }
    double inertia = 0.0;
    for (double d : dist) inertia += d;
    return inertia;
}

// Moves centroids to their cluster means; returns the largest shift.
double update(const Points& points, std::vector<std::vector<double>>& centroids, const std::vector<int>& labels) {
    const std::size_t k = centroids.size();
    std::vector<std::vector<double>> sums(k, std::vector<double>(points.dims, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t r = 0; r < points.rows; ++r) {
        auto row = points.row(r);
        auto& s = sums[labels[r]];
        for (std::size_t d = 0; d < points.dims; ++d) s[d] += row[d];
        ++counts[labels[r]];
    }
    double max_shift = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] == 0) continue;
        double shift = 0.0;
        for (std::size_t d = 0; d < points.dims; ++d) {
            const double v = sums[j][d] / static_cast<double>(counts[j]);
            shift += (v - centroids[j][d]) * (v - centroids[j][d]);
            centroids[j][d] = v;
        }
        max_shift = std::max(max_shift, std::sqrt(shift));
    }
    return max_shift;
}

}  // namespace

KMeansModel kmeans_single_run(const Points& points, std::size_t k, std::uint64_t seed, int max_iter, double tol) {
    check_points(points, k);
    if (max_iter < 1) throw ParameterError("max_iter must be >= 1");
    SeededRng rng(seed);
    KMeansModel model;
    model.k = k;
    model.seed = seed;
    model.centroids = kmeanspp_seed(points, k, rng);
    model.assignments.assign(points.rows, 0);

    model.inertia = assign(points, model.centroids, model.assignments);
    model.inertia_history.push_back(model.inertia);
    for (int it = 1; it <= max_iter; ++it) {
        const double shift = update(points, model.centroids, model.assignments);
        model.inertia = assign(points, model.centroids, model.assignments);
        model.inertia_history.push_back(model.inertia);
        model.iterations_run = it;
        if (shift < tol) break;
    }
    return model;
}

KMeansModel kmeans_fit(const Points& points, const KMeansOptions& options) {
    check_points(points, options.k);
    if (options.restarts < 1) throw ParameterError("restarts must be >= 1");
    KMeansModel best;
    for (int r = 0; r < options.restarts; ++r) {
        auto model = kmeans_single_run(points, options.k, derive_seed(options.seed, static_cast<std::uint64_t>(r)),
                                       options.max_iter, options.tol);
        model.restart_index = static_cast<std::size_t>(r);
        if (r == 0 || model.inertia < best.inertia) best = std::move(model);
    }
    best.seed = options.seed;
    return best;
}

// ---- external validation --------------------------------------------------------

namespace {

struct Contingency {
    std::vector<std::vector<double>> n;  // [true][pred]
    std::vector<double> a;               // true marginals
    std::vector<double> b;               // predicted marginals
    double total = 0.0;
};

Contingency contingency(std::span<const int> t, std::span<const int> p, std::size_t min_len) {
    if (t.size() != p.size()) {
        throw ParameterError("label sequences differ in length (" + std::to_string(t.size()) + " vs " +
                             std::to_string(p.size()) + ")");
    }
    if (t.size() < min_len) throw ParameterError("need at least " + std::to_string(min_len) + " labels");
    std::map<int, std::size_t> ti;
    std::map<int, std::size_t> pi;
    for (int v : t) ti.emplace(v, ti.size());
    for (int v : p) pi.emplace(v, pi.size());
    Contingency c;
    c.n.assign(ti.size(), std::vector<double>(pi.size(), 0.0));
    c.a.assign(ti.size(), 0.0);
    c.b.assign(pi.size(), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto r = ti[t[i]];
        const auto q = pi[p[i]];
        c.n[r][q] += 1.0;
        c.a[r] += 1.0;
        c.b[q] += 1.0;
    }
    c.total = static_cast<double>(t.size());
    return c;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

// Same partition up to relabeling.
bool identical(const Contingency& c) {
    if (c.a.size() != c.b.size()) return false;
    for (const auto& row : c.n) {
        if (std::count_if(row.begin(), row.end(), [](double v) { return v > 0.0; }) != 1) return false;
    }
    return true;
}

}  // namespace

double adjusted_rand_index(std::span<const int> labels_true, std::span<const int> labels_pred) {
    auto c = contingency(labels_true, labels_pred, 2);
    double sum_ij = 0.0;
    for (const auto& row : c.n) {
        for (double v : row) sum_ij += comb2(v);
    }
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (double v : c.a) sum_a += comb2(v);
    for (double v : c.b) sum_b += comb2(v);
    const double expected = sum_a * sum_b / comb2(c.total);
    const double max_index = 0.5 * (sum_a + sum_b);
    const double denom = max_index - expected;
    // Zero only for identical trivial partitions (all-in-one or all singletons).
    if (denom == 0.0) return 1.0;
    return (sum_ij - expected) / denom;
}

double normalized_mutual_information(std::span<const int> labels_true, std::span<const int> labels_pred) {
    auto c = contingency(labels_true, labels_pred, 1);
    if (identical(c)) return 1.0;
    auto entropy = [&](const std::vector<double>& m) {
        double h = 0.0;
        for (double v : m) {
            if (v > 0.0) h -= (v / c.total) * std::log(v / c.total);
        }
        return h;
    };
    const double hu = entropy(c.a);
    const double hv = entropy(c.b);
    if (hu == 0.0 || hv == 0.0) return 0.0;
    double mi = 0.0;
    for (std::size_t i = 0; i < c.a.size(); ++i) {
        for (std::size_t j = 0; j < c.b.size(); ++j) {
            const double nij = c.n[i][j];
            if (nij > 0.0) mi += (nij / c.total) * std::log(c.total * nij / (c.a[i] * c.b[j]));
        }
    }
    return std::clamp(mi / (0.5 * (hu + hv)), 0.0, 1.0);
}

double fowlkes_mallows_index(std::span<const int> labels_true, std::span<const int> labels_pred) {
    auto c = contingency(labels_true, labels_pred, 1);
    double tp = 0.0;
    for (const auto& row : c.n) {
        for (double v : row) tp += comb2(v);
    }
    double true_pairs = 0.0;
    double pred_pairs = 0.0;
    for (double v : c.a) true_pairs += comb2(v);
    for (double v : c.b) pred_pairs += comb2(v);
    if (true_pairs == 0.0 || pred_pairs == 0.0) return 0.0;
    return tp / std::sqrt(true_pairs * pred_pairs);
}

// ---- evaluation -----------------------------------------------------------------

std::string_view to_string(LabelScheme s) { return s == LabelScheme::ThreeWay ? "three_way" : "collapsed_patient"; }

LabelScheme parse_label_scheme(std::string_view s) {
    auto v = text::to_lower(s);
    for (auto& ch : v) {
        if (ch == '-') ch = '_';
    }
    if (v == "three_way") return LabelScheme::ThreeWay;
    if (v == "collapsed_patient" || v == "collapsed") return LabelScheme::CollapsedPatient;
    throw ConfigError("label scheme must be three_way or collapsed_patient");
}

std::vector<int> truth_labels(const FeatureMatrix& matrix, LabelScheme scheme) {
    std::vector<int> labels;
    labels.reserve(matrix.row_count());
    for (const auto& row : matrix.rows) {
        switch (row.cohort) {
            case Cohort::CN: labels.push_back(0); break;
            case Cohort::MCI: labels.push_back(1); break;
            case Cohort::ADRD: labels.push_back(scheme == LabelScheme::ThreeWay ? 2 : 1); break;
            case Cohort::Unlabeled: throw ValidationError("row " + row.note_id + " has no cohort label");
        }
    }
    return labels;
}

ClusteringReport evaluate_clustering(const Points& points, const std::vector<int>& truth, std::size_t k,
                                     std::uint64_t seed, const KMeansOptions& base) {
    if (truth.size() != points.rows) throw ParameterError("truth labels do not match the number of rows");
    KMeansOptions options = base;
    options.k = k;
    options.seed = seed;
    auto model = kmeans_fit(points, options);

    ClusteringReport report;
    report.k = k;
    report.seed = seed;
    report.ari = adjusted_rand_index(truth, model.assignments);
    report.nmi = normalized_mutual_information(truth, model.assignments);
    report.fmi = fowlkes_mallows_index(truth, model.assignments);
    report.cluster_sizes.assign(k, 0);
    for (int a : model.assignments) ++report.cluster_sizes[static_cast<std::size_t>(a)];
    report.inertia = model.inertia;
    report.assignments = std::move(model.assignments);
    return report;
}

ClusteringReport evaluate_clustering(const FeatureMatrix& matrix, std::size_t k, LabelScheme scheme,
                                     std::uint64_t seed, const KMeansOptions& base) {
    auto report = evaluate_clustering(Points::from_matrix(matrix), truth_labels(matrix, scheme), k, seed, base);
    report.scheme = scheme;
    return report;
}

std::string setting_label(const ClusteringReport& r) {
    std::string out;
    if (!r.list_id.empty()) out += r.list_id + " ";
    if (!r.prompting_mode.empty()) out += r.prompting_mode + " ";
    return out + "k=" + std::to_string(r.k) + " " + std::string(to_string(r.scheme));
}

std::string clustering_reports_json(const std::vector<ClusteringReport>& reports, const std::string& provenance) {
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json setting = {{"k", r.k},
                                          {"label_scheme", to_string(r.scheme)},
                                          {"prompting_mode", r.prompting_mode},
                                          {"list_id", r.list_id}};
        results.push_back({{"setting", setting},
                           {"ari", r.ari},
                           {"nmi", r.nmi},
                           {"fmi", r.fmi},
                           {"cluster_sizes", r.cluster_sizes},
                           {"inertia", r.inertia},
                           {"seed", r.seed}});
    }
    nlohmann::ordered_json doc;
    if (!provenance.empty()) doc["provenance"] = provenance;
    doc["results"] = std::move(results);
    return doc.dump(2) + "\n";
}

std::string clustering_reports_text(const std::vector<ClusteringReport>& reports) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-40s %3s %8s %8s %8s\n", "Setting", "K", "ARI", "NMI", "FMI");
    out << line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-40s %3zu %8.3f %8.3f %8.3f\n", setting_label(r).c_str(), r.k, r.ari,
                      r.nmi, r.fmi);
        out << line;
    }
    return out.str();
}

}  // namespace phenomine
