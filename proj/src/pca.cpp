#include "phenomine/pca.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "phenomine/csv.hpp"
#include "phenomine/error.hpp"

namespace phenomine {

namespace {

void fix_sign(std::vector<double>& v) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    }
    if (v[arg] < 0.0) {
        for (auto& x : v) x = -x;
    }
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

PcaProjection pca_project(const Points& points) {
    if (points.rows < 2) throw ParameterError("PCA needs at least 2 rows");
    if (points.dims < 2) throw ParameterError("PCA needs at least 2 features");
    for (double v : points.values) {
        if (!std::isfinite(v)) throw ParameterError("feature matrix contains non-finite values");
    }
    const auto n = static_cast<Eigen::Index>(points.rows);
    const auto d = static_cast<Eigen::Index>(points.dims);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(points.values.data(),
                                                                                                n, d);
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

    PcaProjection out;
    out.mean.assign(mean.data(), mean.data() + d);
    const double trace = cov.trace();
    if (trace <= 0.0) {
        spdlog::warn("zero-variance matrix: PCA components fall back to the first two axes");
        out.zero_variance = true;
        for (int c = 0; c < 2; ++c) {
            out.components[c].assign(points.dims, 0.0);
            out.components[c][c] = 1.0;
        }
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        if (solver.info() != Eigen::Success) throw DomainError("eigendecomposition did not converge");
        // Eigenvalues ascend.
        for (int c = 0; c < 2; ++c) {
            const Eigen::Index idx = d - 1 - c;
            const Eigen::VectorXd v = solver.eigenvectors().col(idx);
            out.components[c].assign(v.data(), v.data() + d);
            fix_sign(out.components[c]);
            out.explained_variance[c] = std::max(0.0, solver.eigenvalues()(idx));
            out.explained_variance_ratio[c] = out.explained_variance[c] / trace;
        }
    }
    out.coords.resize(points.rows * 2);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (int c = 0; c < 2; ++c) {
            double s = 0.0;
            for (Eigen::Index j = 0; j < d; ++j) s += centered(r, j) * out.components[c][j];
            out.coords[2 * r + c] = s;
        }
    }
    return out;
}

PcaProjection pca_project(const FeatureMatrix& matrix) {
    if (matrix.row_count() == 0) throw ParameterError("feature matrix is empty");
    return pca_project(Points::from_matrix(matrix));
}

std::string pca_scatter_csv(const FeatureMatrix& matrix, const PcaProjection& pca, const std::string& provenance) {
    std::ostringstream out;
    if (!provenance.empty()) out << "# " << provenance << '\n';
    out << "note_id,cohort,pc1,pc2\n";
    for (std::size_t r = 0; r < matrix.row_count(); ++r) {
        out << csv::escape(matrix.rows[r].note_id) << ',' << to_string(matrix.rows[r].cohort) << ','
            << fmt("%.10g", pca.pc1(r)) << ',' << fmt("%.10g", pca.pc2(r)) << '\n';
    }
    return out.str();
}

std::string pca_scatter_svg(const FeatureMatrix& matrix, const PcaProjection& pca, const std::string& title,
                            const std::string& provenance) {
    constexpr double W = 640, H = 520, L = 70, R = 150, T = 50, B = 60;
    const double pw = W - L - R;
    const double ph = H - T - B;
    const std::map<Cohort, std::string> colors = {
        {Cohort::CN, "#1f77b4"}, {Cohort::MCI, "#ff7f0e"}, {Cohort::ADRD, "#2ca02c"}, {Cohort::Unlabeled, "#7f7f7f"}};

    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    for (std::size_t r = 0; r < matrix.row_count(); ++r) {
        x0 = std::min(x0, pca.pc1(r));
        x1 = std::max(x1, pca.pc1(r));
        y0 = std::min(y0, pca.pc2(r));
        y1 = std::max(y1, pca.pc2(r));
    }
    auto pad = [](double& lo, double& hi) {
        double span = hi - lo;
        if (span <= 0) span = 1.0;
        lo -= 0.05 * span;
        hi += 0.05 * span;
    };
    pad(x0, x1);
    pad(y0, y1);
    auto sx = [&](double v) { return L + (v - x0) / (x1 - x0) * pw; };
    auto sy = [&](double v) { return T + ph - (v - y0) / (y1 - y0) * ph; };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (!provenance.empty()) out << "<!-- " << xml_escape(provenance) << " -->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
        << W << ' ' << H << "\" font-family=\"sans-serif\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << xml_escape(title)
        << "</text>\n";
    if (pca.zero_variance) {
        out << "<text class=\"warning\" x=\"" << W / 2
            << "\" y=\"42\" text-anchor=\"middle\" font-size=\"12\" fill=\"#b00\">"
               "Warning: all rows are identical (zero variance); projection is degenerate</text>\n";
    }
    out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 20 << "\" text-anchor=\"middle\" font-size=\"13\">PC1 ("
        << fmt("%.1f", 100.0 * pca.explained_variance_ratio[0]) << "% variance)</text>\n";
    out << "<text transform=\"translate(22," << T + ph / 2
        << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">PC2 ("
        << fmt("%.1f", 100.0 * pca.explained_variance_ratio[1]) << "% variance)</text>\n";

    std::map<Cohort, std::size_t> present;
    out << "<g class=\"points\">\n";
    for (std::size_t r = 0; r < matrix.row_count(); ++r) {
        const auto c = matrix.rows[r].cohort;
        ++present[c];
        out << "<circle cx=\"" << fmt("%.2f", sx(pca.pc1(r))) << "\" cy=\"" << fmt("%.2f", sy(pca.pc2(r)))
            << "\" r=\"3\" fill=\"" << colors.at(c) << "\" fill-opacity=\"0.6\" data-cohort=\"" << to_string(c)
            << "\"/>\n";
    }
    out << "</g>\n<g class=\"legend\">\n";
    double ly = T + 10;
    for (const auto& [cohort, count] : present) {
        out << "<circle cx=\"" << W - R + 20 << "\" cy=\"" << ly << "\" r=\"5\" fill=\"" << colors.at(cohort)
            << "\"/>\n";
        out << "<text x=\"" << W - R + 32 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << to_string(cohort)
            << " (n=" << count << ")</text>\n";
        ly += 20;
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

}  // namespace phenomine
