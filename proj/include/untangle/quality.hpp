#pragma once

#include <vector>

#include <Eigen/Core>

#include "untangle/mesh.hpp"
#include "untangle/types.hpp"

namespace untangle {

// Singular values in decreasing order. Closed form for 2x2, one-sided
// Jacobi (Eigen::JacobiSVD) for 3x3.
[[nodiscard]] Vec singular_values(const Mat& J);

// sigma_1 / sigma_d, +infinity when sigma_d == 0.
[[nodiscard]] double singular_ratio(const Mat& J);

struct QualityReport {
    double min_det = 0;
    double max_stretch = 0;
    // Same metrics after dropping the worst 5% of measurements of each metric.
    double min_det_p95 = 0;
    double max_stretch_p95 = 0;
    int num_measurements = 0;
    int num_inverted = 0;       // det J <= 0
    std::vector<double> det;    // per corner simplex, for colormaps
    std::vector<double> stretch;
};

[[nodiscard]] QualityReport report(const Eigen::VectorXd& U, const Instance& inst);

// Value left after discarding floor(fraction * n) worst entries, where
// worst means smallest (lowest = true) or largest.
[[nodiscard]] double trimmed_extreme(std::vector<double> values, double fraction, bool lowest);

}  // namespace untangle
