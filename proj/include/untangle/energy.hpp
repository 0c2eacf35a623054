#pragma once

#include <Eigen/Core>

#include "untangle/mesh.hpp"
#include "untangle/types.hpp"

namespace untangle {

struct EnergyParams {
    double lambda = 1.0;   // shape (f) vs. area (g) trade-off, >= 0
    double eps = 1.0;      // regularization, >= 0
    int threads = 1;
};

// Regularized positive part of the determinant: (D + sqrt(eps^2 + D^2)) / 2.
// Throws std::domain_error when eps == 0 and D <= 0.
[[nodiscard]] double chi(double D, double eps);
[[nodiscard]] double chi_prime(double D, double eps);     // d chi / dD
[[nodiscard]] double chi_second(double D, double eps);    // d^2 chi / dD^2
[[nodiscard]] double chi_eps(double D, double eps);       // d chi / d eps

// Dual basis b_i (as columns) with a_i . b_j = delta_ij det J, so that
// d(det J)/d a_i = b_i. Uses the rotation formulas in 2D and cross
// products in 3D; never inverts J.
[[nodiscard]] Mat dual_basis(const Mat& J);

[[nodiscard]] double determinant(const Mat& J);

// Per-simplex quantities shared by the gradient and Hessian code.
struct ElementEval {
    Mat J;
    Mat B;                 // dual basis columns
    double det = 0;
    double chi = 0;
    double chi_prime = 0;
    double f = 0;          // tr(J^T J) / chi^(2/d)
    double g = 0;          // (det^2 + 1) / chi
    double phi = 0;        // f + lambda g

    [[nodiscard]] int dim() const noexcept { return int(J.rows()); }
};

// With eps == 0 and det J <= 0 the energies are +infinity.
[[nodiscard]] ElementEval evaluate(const Mat& J, const EnergyParams& params);
[[nodiscard]] ElementEval element_energy(const CornerSimplex& corner, const Eigen::VectorXd& U,
                                         const EnergyParams& params);

// d phi / d a_i as the columns of a d x d matrix.
[[nodiscard]] Mat phi_gradient(const ElementEval& e, const EnergyParams& params);

// F(U, eps) = sum_t w_t phi(J_t). Returns +infinity if any term is not
// finite, which includes every folded element when eps == 0.
[[nodiscard]] double total_energy(const Eigen::VectorXd& U, const Instance& inst, const EnergyParams& params);

// Exact gradient of total_energy. Entries of locked vertices are zero.
[[nodiscard]] Eigen::VectorXd gradient(const Eigen::VectorXd& U, const Instance& inst, const EnergyParams& params);

// Both at once, sharing the per-element evaluation.
double energy_and_gradient(const Eigen::VectorXd& U, const Instance& inst, const EnergyParams& params,
                           Eigen::VectorXd& grad);

}  // namespace untangle
