#include "untangle/energy.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "untangle/parallel.hpp"

namespace untangle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_domain(double D, double eps) {
    if (eps < 0) throw std::domain_error("chi: negative eps");
    if (eps == 0 && D <= 0) throw std::domain_error("chi: eps = 0 requires a positive determinant");
}

}  // namespace

// For D < 0 the textbook forms cancel catastrophically; the rationalized
// forms below are used instead.
double chi(double D, double eps) {
    check_domain(D, eps);
    const double r = std::hypot(eps, D);
    if (D >= 0) return 0.5 * (D + r);
    return 0.5 * eps * eps / (r - D);
}

double chi_prime(double D, double eps) {
    check_domain(D, eps);
    const double r = std::hypot(eps, D);
    if (D >= 0) return 0.5 * (1.0 + D / r);
    return 0.5 * eps * eps / (r * (r - D));
}

double chi_second(double D, double eps) {
    check_domain(D, eps);
    const double r = std::hypot(eps, D);
    return 0.5 * eps * eps / (r * r * r);
}

double chi_eps(double D, double eps) {
    check_domain(D, eps);
    return 0.5 * eps / std::hypot(eps, D);
}

double determinant(const Mat& J) {
    if (J.rows() == 2) return J(0, 0) * J(1, 1) - J(1, 0) * J(0, 1);
    const Eigen::Vector3d a0 = J.col(0), a1 = J.col(1), a2 = J.col(2);
    return a0.dot(a1.cross(a2));
}

Mat dual_basis(const Mat& J) {
    const int dim = int(J.rows());
    Mat B(dim, dim);
    if (dim == 2) {
        B(0, 0) = J(1, 1);
        B(1, 0) = -J(0, 1);
        B(0, 1) = -J(1, 0);
        B(1, 1) = J(0, 0);
        return B;
    }
    const Eigen::Vector3d a0 = J.col(0), a1 = J.col(1), a2 = J.col(2);
    B.col(0) = a1.cross(a2);
    B.col(1) = a2.cross(a0);
    B.col(2) = a0.cross(a1);
    return B;
}

ElementEval evaluate(const Mat& J, const EnergyParams& params) {
    const int dim = int(J.rows());
    ElementEval e;
    e.J = J;
    e.B = dual_basis(J);
    e.det = (J.col(0).transpose() * e.B.col(0))(0, 0);
    if (params.eps == 0 && e.det <= 0) {
        e.f = e.g = e.phi = kInf;
        return e;
    }
    e.chi = chi(e.det, params.eps);
    e.chi_prime = chi_prime(e.det, params.eps);
    e.f = J.squaredNorm() / std::pow(e.chi, 2.0 / dim);
    e.g = (e.det * e.det + 1.0) / e.chi;
    e.phi = e.f + params.lambda * e.g;
    return e;
}

ElementEval element_energy(const CornerSimplex& corner, const Eigen::VectorXd& U, const EnergyParams& params) {
    return evaluate(compute_jacobian(corner, U), params);
}

Mat phi_gradient(const ElementEval& e, const EnergyParams& params) {
    const int dim = e.dim();
    const double lambda = params.lambda;
    const double ca = 2.0 / std::pow(e.chi, 2.0 / dim);
    const double cb = ((2.0 / dim) * e.f * e.chi_prime - 2.0 * lambda * e.det + lambda * e.g * e.chi_prime) / e.chi;
    return ca * e.J - cb * e.B;
}

double total_energy(const Eigen::VectorXd& U, const Instance& inst, const EnergyParams& params) {
    std::vector<double> terms(inst.corners.size());
    parallel_for(terms.size(), params.threads, [&](std::size_t i) {
        const CornerSimplex& c = inst.corners[i];
        terms[i] = c.weight * element_energy(c, U, params).phi;
    });
    const double F = pairwise_sum(terms);
    return std::isfinite(F) ? F : kInf;
}

double energy_and_gradient(const Eigen::VectorXd& U, const Instance& inst, const EnergyParams& params,
                           Eigen::VectorXd& grad) {
    const int dim = inst.dim;
    const std::size_t n = inst.corners.size();
    std::vector<double> terms(n);
    std::vector<VertMat> local(n);
    parallel_for(n, params.threads, [&](std::size_t i) {
        const CornerSimplex& c = inst.corners[i];
        const ElementEval e = element_energy(c, U, params);
        terms[i] = c.weight * e.phi;
        if (std::isfinite(terms[i])) local[i] = c.weight * phi_gradient(e, params) * c.Z.transpose();
    });

    const double F = pairwise_sum(terms);
    grad.setZero(U.size());
    if (!std::isfinite(F)) {
        grad.setConstant(kInf);
        return kInf;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const CornerSimplex& c = inst.corners[i];
        for (int j = 0; j <= dim; ++j) grad.segment(std::ptrdiff_t(dim) * c.verts[j], dim) += local[i].col(j);
    }
    for (int v = 0; v < inst.num_vertices; ++v)
        if (inst.locked[v]) grad.segment(std::ptrdiff_t(dim) * v, dim).setZero();
    return F;
}

Eigen::VectorXd gradient(const Eigen::VectorXd& U, const Instance& inst, const EnergyParams& params) {
    Eigen::VectorXd grad;
    energy_and_gradient(U, inst, params, grad);
    return grad;
}

}  // namespace untangle
