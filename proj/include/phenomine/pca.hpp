#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "phenomine/clustering.hpp"

namespace phenomine {

struct PcaProjection {
    /// Two unit direction vectors of the feature dimension.
    std::array<std::vector<double>, 2> components;
    std::array<double, 2> explained_variance{};
    std::array<double, 2> explained_variance_ratio{};
    /// rows x 2, row-major.
    std::vector<double> coords;
    std::vector<double> mean;
    bool zero_variance = false;

    double pc1(std::size_t r) const { return coords[2 * r]; }
    double pc2(std::size_t r) const { return coords[2 * r + 1]; }
};

/// Mean-centered, unscaled; components come from the sample covariance. Each
/// component's largest-magnitude coordinate is made positive.
PcaProjection pca_project(const Points& points);
PcaProjection pca_project(const FeatureMatrix& matrix);

/// CSV `note_id,cohort,pc1,pc2`.
std::string pca_scatter_csv(const FeatureMatrix& matrix, const PcaProjection& pca, const std::string& provenance = {});
/// Cohort-colored scatter with legend and variance ratios on the axes.
std::string pca_scatter_svg(const FeatureMatrix& matrix, const PcaProjection& pca, const std::string& title,
                            const std::string& provenance = {});

}  // namespace phenomine
