#pragma once

#include <Eigen/Core>

namespace untangle {

// Small fixed-capacity matrices. Dimension is a runtime value (2 or 3) but
// storage never exceeds the 3D case, so none of these allocate.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

// (d+1) x d gradient matrix mapping simplex vertices to the Jacobian.
using ZMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 3>;

// d x (d+1) matrix whose columns are the map-space vertices of one simplex.
using VertMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 4>;

// Columnwise flattening a of a Jacobian (d^2 entries) and matrices over it.
using FlatVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 9, 1>;
using FlatMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 9, 9>;

inline FlatVec flatten(const Mat& J) {
    return Eigen::Map<const FlatVec>(J.data(), J.size());
}

inline Mat unflatten(const FlatVec& a, int dim) {
    return Eigen::Map<const Mat>(a.data(), dim, dim);
}

}  // namespace untangle
