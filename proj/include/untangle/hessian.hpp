#pragma once

#include <vector>

#include <Eigen/Core>

#include "untangle/energy.hpp"
#include "untangle/mesh.hpp"
#include "untangle/sparse.hpp"
#include "untangle/types.hpp"

namespace untangle {

// Second derivatives of the convex extension
//   Phi(a, D) = |a|^2 / q^(2/d) + lambda (D^2 + 1) / q,
// q the linearization of chi at the current determinant, together with
// the kept part M+ of the Hessian of phi in flattened-Jacobian coordinates.
struct CornerHessian {
    FlatMat M_plus;
    double phi_aa = 0;   // d^2 Phi / da da^T = phi_aa * I
    double phi_DD = 0;   // d^2 Phi / dD^2
    FlatVec phi_aD;      // d^2 Phi / da dD
};

[[nodiscard]] CornerHessian corner_M_plus(const ElementEval& e, const EnergyParams& params);

// Neglected part M+- = dPhi/dD d^2D/da^2 - (chi''/chi)((2/d) f + lambda g) b b^T.
// Only used to check the decomposition.
[[nodiscard]] FlatMat corner_M_indefinite(const ElementEval& e, const EnergyParams& params);

// Exact d^2(det J) / da da^T; constant in 2D, linear in J in 3D.
[[nodiscard]] FlatMat det_hessian(const Mat& J);

// H+ restricted to the free vertices, in d x d blocks.
struct SparseSystem {
    BlockSparseMatrix H;
    std::vector<int> free_vertices;    // block row -> vertex
    std::vector<int> vertex_to_row;    // vertex -> block row, -1 when locked
    bool translation_null_space = false;

    [[nodiscard]] int dim() const noexcept { return H.block_size(); }
    [[nodiscard]] Eigen::VectorXd restrict(const Eigen::VectorXd& full) const;
    [[nodiscard]] Eigen::VectorXd expand(const Eigen::VectorXd& reduced, int num_vertices) const;
};

[[nodiscard]] SparseSystem assemble_H_plus(const Eigen::VectorXd& U, const Instance& inst,
                                           const EnergyParams& params);

}  // namespace untangle
