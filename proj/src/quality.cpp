#include "untangle/quality.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/SVD>

#include "untangle/energy.hpp"

namespace untangle {

Vec singular_values(const Mat& J) {
    if (J.rows() == 2) {
        const double a = J(0, 0), b = J(0, 1), c = J(1, 0), d = J(1, 1);
        const double p = std::hypot(a + d, c - b);
        const double q = std::hypot(a - d, b + c);
        Vec s(2);
        s << 0.5 * (p + q), 0.5 * std::abs(p - q);
        return s;
    }
    const Eigen::Matrix3d M = J;
    return Eigen::JacobiSVD<Eigen::Matrix3d>(M).singularValues();
}

double singular_ratio(const Mat& J) {
    const Vec s = singular_values(J);
    const double smin = s(s.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

double trimmed_extreme(std::vector<double> values, double fraction, bool lowest) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto drop = std::size_t(std::floor(fraction * double(values.size())));
    const auto nth = values.begin() + std::ptrdiff_t(std::min(drop, values.size() - 1));
    if (lowest)
        std::nth_element(values.begin(), nth, values.end());
    else
        std::nth_element(values.begin(), nth, values.end(), std::greater<>());
    return *nth;
}

QualityReport report(const Eigen::VectorXd& U, const Instance& inst) {
    QualityReport q;
    q.num_measurements = int(inst.corners.size());
    q.det.reserve(inst.corners.size());
    q.stretch.reserve(inst.corners.size());
    for (const CornerSimplex& c : inst.corners) {
        const Mat J = compute_jacobian(c, U);
        q.det.push_back(determinant(J));
        q.stretch.push_back(singular_ratio(J));
        if (q.det.back() <= 0) ++q.num_inverted;
    }
    if (q.det.empty()) return q;
    q.min_det = *std::min_element(q.det.begin(), q.det.end());
    q.max_stretch = *std::max_element(q.stretch.begin(), q.stretch.end());
    q.min_det_p95 = trimmed_extreme(q.det, 0.05, true);
    q.max_stretch_p95 = trimmed_extreme(q.stretch, 0.05, false);
    return q;
}

}  // namespace untangle
