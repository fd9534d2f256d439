#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phenomine/cohort.hpp"
#include "phenomine/extraction.hpp"

namespace phenomine {

/// Upper-tail probability of the chi-square distribution with `df` degrees
/// of freedom. Throws DomainError for x < 0 or df < 1.
double chi2_survival(double x, int df);

/// Regularized upper incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);

struct ContingencyTable {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<std::int64_t>> cells;  // [row][col]

    std::int64_t row_total(std::size_t r) const;
    std::int64_t col_total(std::size_t c) const;
    std::int64_t total() const;
    std::size_t rows() const { return cells.size(); }
    std::size_t cols() const { return cells.empty() ? 0 : cells.front().size(); }
    void validate() const;
};

enum class YatesMode { Auto, On, Off };
YatesMode parse_yates_mode(std::string_view s);

enum class Granularity { Category, Phenotype };
Granularity parse_granularity(std::string_view s);

struct ChiSquareResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    bool yates_applied = false;
    std::string stars;  // "***", "**", "*" or "ns"
};

std::string significance_stars(double p);

/// Pearson chi-square test of independence. Yates' correction subtracts 0.5
/// from |O - E| (clamped at 0); Auto applies it to 2x2 tables only.
ChiSquareResult chi_square_test(const ContingencyTable& table, YatesMode yates = YatesMode::Auto);

/// Present/absent x cohort counts. Category granularity: present means at
/// least one phenotype of the category; phenotype granularity: `name` is a
/// single column.
ContingencyTable build_contingency(const FeatureMatrix& matrix, std::string_view name,
                                   const std::vector<Cohort>& cohorts,
                                   Granularity granularity = Granularity::Category);

/// Per-category cohort counts as transcribed from an extraction summary.
struct CategoryCounts {
    std::string list;
    std::string category;
    std::map<Cohort, std::int64_t> n_total;
    std::map<Cohort, std::int64_t> n_none;
};

/// CSV `list,category,cohort,n_total,n_none`; categories keep file order.
std::vector<CategoryCounts> read_counts_fixture(const std::filesystem::path& path);
ContingencyTable contingency_from_counts(const CategoryCounts& counts, const std::vector<Cohort>& cohorts);

struct StatsCell {
    std::optional<ChiSquareResult> result;
    std::string error;  // set when the table was degenerate
};

struct StatsRow {
    std::string list;
    std::string category;
    /// Overall, CN vs MCI, CN vs ADRD, MCI vs ADRD.
    std::array<StatsCell, 4> cells;
};

struct StatsReport {
    std::vector<StatsRow> rows;
};

inline const std::array<std::string_view, 4> kComparisonNames = {"Overall", "CN vs. MCI", "CN vs. ADRD",
                                                                 "MCI vs. ADRD"};

StatsReport analyze_all(const std::vector<CategoryCounts>& fixture, YatesMode yates = YatesMode::Auto);
StatsReport analyze_all(const FeatureMatrix& matrix, YatesMode yates = YatesMode::Auto,
                        Granularity granularity = Granularity::Category);

/// Stars when p < 0.05, otherwise the p-value to three decimals; U+2014 when degenerate.
std::string display_cell(const StatsCell& cell);
std::string stats_report_csv(const StatsReport& report, const std::string& provenance = {});
std::string stats_report_text(const StatsReport& report);

}  // namespace phenomine
