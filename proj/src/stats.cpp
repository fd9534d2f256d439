#include "phenomine/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "phenomine/csv.hpp"
#include "phenomine/error.hpp"
#include "phenomine/text.hpp"

namespace phenomine {

// ---- distribution ---------------------------------------------------------------

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

double log_prefactor(double a, double x) { return -x + a * std::log(x) - std::lgamma(a); }

// Lower regularized gamma P(a, x) by its power series; converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(log_prefactor(a, x));
}

// Upper regularized gamma Q(a, x) by continued fraction (modified Lentz); for x >= a + 1.
double gamma_q_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return std::exp(log_prefactor(a, x)) * h;
}

}  // namespace

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0)) throw DomainError("incomplete gamma needs a > 0");
    if (!(x >= 0.0)) throw DomainError("incomplete gamma needs x >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_fraction(a, x);
}

double chi2_survival(double x, int df) {
    if (df < 1) throw DomainError("chi-square needs df >= 1");
    if (!(x >= 0.0)) throw DomainError("chi-square statistic must be >= 0");
    if (df == 2) return std::exp(-x / 2.0);
    if (df == 1) return std::erfc(std::sqrt(x / 2.0));
    return regularized_gamma_q(df / 2.0, x / 2.0);
}

// ---- tables ---------------------------------------------------------------------

std::int64_t ContingencyTable::row_total(std::size_t r) const {
    std::int64_t t = 0;
    for (auto v : cells.at(r)) t += v;
    return t;
}

std::int64_t ContingencyTable::col_total(std::size_t c) const {
    std::int64_t t = 0;
    for (const auto& row : cells) t += row.at(c);
    return t;
}

std::int64_t ContingencyTable::total() const {
    std::int64_t t = 0;
    for (std::size_t r = 0; r < rows(); ++r) t += row_total(r);
    return t;
}

void ContingencyTable::validate() const {
    if (rows() < 2 || cols() < 2) throw ValidationError("contingency table needs at least 2 rows and 2 columns");
    for (const auto& row : cells) {
        if (row.size() != cols()) throw ValidationError("ragged contingency table");
        for (auto v : row) {
            if (v < 0) throw ValidationError("negative count in contingency table");
        }
    }
}

YatesMode parse_yates_mode(std::string_view s) {
    auto v = text::to_lower(s);
    if (v == "auto") return YatesMode::Auto;
    if (v == "on") return YatesMode::On;
    if (v == "off") return YatesMode::Off;
    throw ConfigError("--yates must be auto, on or off");
}

Granularity parse_granularity(std::string_view s) {
    auto v = text::to_lower(s);
    if (v == "category") return Granularity::Category;
    if (v == "phenotype") return Granularity::Phenotype;
    throw ConfigError("--granularity must be category or phenotype");
}

std::string significance_stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "ns";
}

ChiSquareResult chi_square_test(const ContingencyTable& table, YatesMode yates) {
    table.validate();
    const auto n = static_cast<double>(table.total());
    for (std::size_t r = 0; r < table.rows(); ++r) {
        if (table.row_total(r) == 0) {
            throw DegenerateTableError("row '" + (r < table.row_labels.size() ? table.row_labels[r] : std::to_string(r)) +
                                       "' has zero total");
        }
    }
    for (std::size_t c = 0; c < table.cols(); ++c) {
        if (table.col_total(c) == 0) {
            throw DegenerateTableError("column '" +
                                       (c < table.col_labels.size() ? table.col_labels[c] : std::to_string(c)) +
                                       "' has zero total");
        }
    }

    ChiSquareResult out;
    out.yates_applied = yates == YatesMode::On || (yates == YatesMode::Auto && table.rows() == 2 && table.cols() == 2);
    const double correction = out.yates_applied ? 0.5 : 0.0;
    double stat = 0.0;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const auto rt = static_cast<double>(table.row_total(r));
        for (std::size_t c = 0; c < table.cols(); ++c) {
            const double expected = rt * static_cast<double>(table.col_total(c)) / n;
            const double dev = std::max(0.0, std::fabs(static_cast<double>(table.cells[r][c]) - expected) - correction);
            stat += dev * dev / expected;
        }
    }
    out.statistic = stat;
    out.df = static_cast<int>((table.rows() - 1) * (table.cols() - 1));
    out.p_value = chi2_survival(stat, out.df);
    out.stars = significance_stars(out.p_value);
    return out;
}

ContingencyTable build_contingency(const FeatureMatrix& matrix, std::string_view name,
                                   const std::vector<Cohort>& cohorts, Granularity granularity) {
    if (cohorts.size() < 2 || cohorts.size() > 3) throw ParameterError("contingency needs 2 or 3 cohorts");
    std::vector<std::size_t> columns;
    if (granularity == Granularity::Category) {
        columns = matrix.group_columns(name);
        if (columns.empty()) throw ValidationError("unknown category '" + std::string(name) + "'");
    } else {
        for (std::size_t c = 0; c < matrix.column_count(); ++c) {
            const auto& col = matrix.columns[c];
            auto sep = col.rfind("::");
            if (col == name || (sep != std::string::npos && std::string_view(col).substr(sep + 2) == name)) {
                columns.push_back(c);
            }
        }
        if (columns.size() != 1) {
            throw ValidationError(columns.empty() ? "unknown phenotype column '" + std::string(name) + "'"
                                                  : "ambiguous phenotype '" + std::string(name) + "'");
        }
    }

    ContingencyTable t;
    t.row_labels = {"present", "absent"};
    t.cells.assign(2, std::vector<std::int64_t>(cohorts.size(), 0));
    for (std::size_t k = 0; k < cohorts.size(); ++k) {
        t.col_labels.emplace_back(to_string(cohorts[k]));
        std::int64_t members = 0;
        for (std::size_t r = 0; r < matrix.row_count(); ++r) {
            if (matrix.rows[r].cohort != cohorts[k]) continue;
            ++members;
            bool present = std::any_of(columns.begin(), columns.end(), [&](std::size_t c) { return matrix.at(r, c); });
            ++t.cells[present ? 0 : 1][k];
        }
        if (members == 0) throw ValidationError("cohort " + std::string(to_string(cohorts[k])) + " has no rows");
    }
    return t;
}

std::vector<CategoryCounts> read_counts_fixture(const std::filesystem::path& path) {
    auto table = csv::read_file(path);
    const auto src = path.string();
    auto c_list = table.require_column("list", src);
    auto c_cat = table.require_column("category", src);
    auto c_co = table.require_column("cohort", src);
    auto c_tot = table.require_column("n_total", src);
    auto c_none = table.require_column("n_none", src);
    std::vector<CategoryCounts> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto where = src + ":" + std::to_string(table.row_lines[r]);
        if (row.size() != table.header.size()) throw SchemaError(where, "wrong field count");
        auto parse_count = [&](const std::string& s) -> std::int64_t {
            try {
                std::size_t used = 0;
                long long v = std::stoll(text::trim(s), &used);
                if (v < 0) throw std::out_of_range(s);
                return v;
            } catch (const std::exception&) {
                throw SchemaError(where, "expected a non-negative count, got '" + s + "'");
            }
        };
        Cohort cohort = parse_cohort(row[c_co]);
        auto total = parse_count(row[c_tot]);
        auto none = parse_count(row[c_none]);
        if (none > total) throw SchemaError(where, "n_none exceeds n_total");
        auto it = std::find_if(out.begin(), out.end(), [&](const CategoryCounts& c) {
            return c.list == row[c_list] && c.category == row[c_cat];
        });
        if (it == out.end()) {
            out.push_back({row[c_list], row[c_cat], {}, {}});
            it = out.end() - 1;
        }
        if (it->n_total.count(cohort)) throw SchemaError(where, "duplicate cohort for category");
        it->n_total[cohort] = total;
        it->n_none[cohort] = none;
    }
    return out;
}

ContingencyTable contingency_from_counts(const CategoryCounts& counts, const std::vector<Cohort>& cohorts) {
    ContingencyTable t;
    t.row_labels = {"present", "absent"};
    t.cells.assign(2, std::vector<std::int64_t>(cohorts.size(), 0));
    for (std::size_t k = 0; k < cohorts.size(); ++k) {
        auto it = counts.n_total.find(cohorts[k]);
        if (it == counts.n_total.end()) {
            throw ValidationError(counts.list + "/" + counts.category + ": missing cohort " +
                                  std::string(to_string(cohorts[k])));
        }
        if (it->second == 0) {
            throw ValidationError(counts.list + "/" + counts.category + ": cohort " +
                                  std::string(to_string(cohorts[k])) + " is empty");
        }
        const auto none = counts.n_none.at(cohorts[k]);
        t.col_labels.emplace_back(to_string(cohorts[k]));
        t.cells[0][k] = it->second - none;
        t.cells[1][k] = none;
    }
    return t;
}

// ---- reports --------------------------------------------------------------------

namespace {

const std::array<std::vector<Cohort>, 4> kComparisons = {{{Cohort::CN, Cohort::MCI, Cohort::ADRD},
                                                          {Cohort::CN, Cohort::MCI},
                                                          {Cohort::CN, Cohort::ADRD},
                                                          {Cohort::MCI, Cohort::ADRD}}};

template <typename MakeTable>
StatsRow run_row(std::string list, std::string category, MakeTable make, YatesMode yates) {
    StatsRow row{std::move(list), std::move(category), {}};
    for (std::size_t i = 0; i < kComparisons.size(); ++i) {
        try {
            row.cells[i].result = chi_square_test(make(kComparisons[i]), yates);
        } catch (const DegenerateTableError& e) {
            row.cells[i].error = e.what();
        }
    }
    return row;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

StatsReport analyze_all(const std::vector<CategoryCounts>& fixture, YatesMode yates) {
    StatsReport report;
    for (const auto& counts : fixture) {
        for (Cohort c : {Cohort::CN, Cohort::MCI, Cohort::ADRD}) {
            if (!counts.n_total.count(c)) {
                throw ValidationError(counts.list + "/" + counts.category + ": missing cohort " +
                                      std::string(to_string(c)));
            }
        }
        report.rows.push_back(run_row(
            counts.list, counts.category,
            [&](const std::vector<Cohort>& cs) { return contingency_from_counts(counts, cs); }, yates));
    }
    return report;
}

StatsReport analyze_all(const FeatureMatrix& matrix, YatesMode yates, Granularity granularity) {
    for (Cohort c : {Cohort::CN, Cohort::MCI, Cohort::ADRD}) {
        bool any = std::any_of(matrix.rows.begin(), matrix.rows.end(), [c](const MatrixRow& r) { return r.cohort == c; });
        if (!any) throw ValidationError("feature matrix has no " + std::string(to_string(c)) + " rows");
    }
    StatsReport report;
    auto split_name = [](const std::string& key) -> std::pair<std::string, std::string> {
        auto sep = key.find("::");
        if (sep == std::string::npos) return {"", key};
        return {key.substr(0, sep), key.substr(sep + 2)};
    };
    if (granularity == Granularity::Category) {
        for (const auto& group : matrix.group_names()) {
            auto [list, category] = split_name(group);
            report.rows.push_back(run_row(
                list, category,
                [&](const std::vector<Cohort>& cs) { return build_contingency(matrix, group, cs, granularity); },
                yates));
        }
    } else {
        for (const auto& col : matrix.columns) {
            auto [list, rest] = split_name(col);
            report.rows.push_back(run_row(
                list, rest,
                [&](const std::vector<Cohort>& cs) { return build_contingency(matrix, col, cs, granularity); },
                yates));
        }
    }
    return report;
}

std::string display_cell(const StatsCell& cell) {
    if (!cell.result) return "\xE2\x80\x94";
    if (cell.result->p_value < 0.05) return cell.result->stars;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.3f", cell.result->p_value);
    return buf;
}

std::string stats_report_csv(const StatsReport& report, const std::string& provenance) {
    std::ostringstream out;
    if (!provenance.empty()) out << "# " << provenance << '\n';
    csv::write_row(out, {"list", "category", "comparison", "statistic", "df", "p_value", "yates", "stars", "display",
                         "note"});
    for (const auto& row : report.rows) {
        for (std::size_t i = 0; i < row.cells.size(); ++i) {
            const auto& cell = row.cells[i];
            if (cell.result) {
                const auto& r = *cell.result;
                csv::write_row(out, {row.list, row.category, std::string(kComparisonNames[i]), format_double(r.statistic),
                                     std::to_string(r.df), format_double(r.p_value), r.yates_applied ? "1" : "0",
                                     r.stars, display_cell(cell), ""});
            } else {
                csv::write_row(out, {row.list, row.category, std::string(kComparisonNames[i]), "", "", "", "", "",
                                     display_cell(cell), cell.error});
            }
        }
    }
    return out.str();
}

std::string stats_report_text(const StatsReport& report) {
    std::size_t name_w = std::string_view("Category").size();
    for (const auto& row : report.rows) name_w = std::max(name_w, row.category.size());
    std::ostringstream out;
    auto pad = [](std::string s, std::size_t w) {
        // The em dash is one column but three bytes.
        std::size_t visible = text::utf8_length(s);
        if (visible < w) s.append(w - visible, ' ');
        return s;
    };
    std::string current_list = "\x01";
    for (const auto& row : report.rows) {
        if (row.list != current_list) {
            if (current_list != "\x01") out << '\n';
            current_list = row.list;
            if (!row.list.empty()) out << "[" << row.list << "]\n";
            out << pad("Category", name_w);
            for (auto n : kComparisonNames) out << "  " << pad(std::string(n), 13);
            out << '\n';
        }
        out << pad(row.category, name_w);
        for (const auto& cell : row.cells) out << "  " << pad(display_cell(cell), 13);
        out << '\n';
    }
    out << "\nSignificance levels: *** p<0.001, ** p<0.01, * p<0.05\n";
    return out.str();
}

}  // namespace phenomine
