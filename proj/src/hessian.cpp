#include "untangle/hessian.hpp"

#include <cmath>

#include "untangle/parallel.hpp"

namespace untangle {

namespace {

using LocalMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 12, 12>;
using KronMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 12, 9>;

int levi_civita(int i, int j, int k) { return (i - j) * (j - k) * (k - i) / 2; }

// Z (x) I_d: maps flattened-Jacobian derivatives to vertex derivatives.
KronMat kron_identity(const ZMat& Z) {
    const int dim = int(Z.cols());
    KronMat K = KronMat::Zero((dim + 1) * dim, dim * dim);
    for (int j = 0; j <= dim; ++j)
        for (int m = 0; m < dim; ++m)
            for (int r = 0; r < dim; ++r) K(j * dim + r, m * dim + r) = Z(j, m);
    return K;
}

}  // namespace

CornerHessian corner_M_plus(const ElementEval& e, const EnergyParams& params) {
    const int d = e.dim();
    const double lambda = params.lambda;
    const double x = e.chi, xp = e.chi_prime, D = e.det;
    const FlatVec a = flatten(e.J);
    const FlatVec b = flatten(e.B);
    const double a2 = a.squaredNorm();
    const double p = 2.0 / d;

    CornerHessian h;
    h.phi_aa = 2.0 / std::pow(x, p);
    h.phi_DD = p * (1.0 + p) * a2 * xp * xp / std::pow(x, 2.0 + p) +
               lambda * (2.0 / x - 4.0 * D * xp / (x * x) + 2.0 * (1.0 + D * D) * xp * xp / (x * x * x));
    h.phi_aD = -(2.0 * p) * xp / std::pow(x, 1.0 + p) * a;

    h.M_plus = h.phi_aa * FlatMat::Identity(d * d, d * d);
    h.M_plus.noalias() += b * h.phi_aD.transpose();
    h.M_plus.noalias() += h.phi_aD * b.transpose();
    h.M_plus.noalias() += h.phi_DD * b * b.transpose();
    return h;
}

FlatMat det_hessian(const Mat& J) {
    const int d = int(J.rows());
    FlatMat H = FlatMat::Zero(d * d, d * d);
    // Entry (p, i) of J sits at i * d + p in the columnwise flattening.
    if (d == 2) {
        H(0 * 2 + 0, 1 * 2 + 1) = H(1 * 2 + 1, 0 * 2 + 0) = 1.0;
        H(0 * 2 + 1, 1 * 2 + 0) = H(1 * 2 + 0, 0 * 2 + 1) = -1.0;
        return H;
    }
    for (int p = 0; p < 3; ++p)
        for (int i = 0; i < 3; ++i)
            for (int q = 0; q < 3; ++q)
                for (int j = 0; j < 3; ++j) {
                    double s = 0.0;
                    for (int r = 0; r < 3; ++r)
                        for (int k = 0; k < 3; ++k) s += levi_civita(p, q, r) * levi_civita(i, j, k) * J(r, k);
                    H(i * 3 + p, j * 3 + q) = s;
                }
    return H;
}

FlatMat corner_M_indefinite(const ElementEval& e, const EnergyParams& params) {
    const int d = e.dim();
    const double lambda = params.lambda;
    const double x = e.chi, xp = e.chi_prime, D = e.det;
    const double p = 2.0 / d;
    const FlatVec a = flatten(e.J);
    const FlatVec b = flatten(e.B);
    const double phi_D = -p * a.squaredNorm() * xp / std::pow(x, 1.0 + p) +
                         lambda * (2.0 * D / x - (D * D + 1.0) * xp / (x * x));
    const double xpp = chi_second(D, params.eps);
    FlatMat M = phi_D * det_hessian(e.J);
    M.noalias() -= (xpp / x) * (p * e.f + lambda * e.g) * b * b.transpose();
    return M;
}

Eigen::VectorXd SparseSystem::restrict(const Eigen::VectorXd& full) const {
    const int d = dim();
    Eigen::VectorXd r(std::ptrdiff_t(free_vertices.size()) * d);
    for (std::size_t i = 0; i < free_vertices.size(); ++i)
        r.segment(std::ptrdiff_t(i) * d, d) = full.segment(std::ptrdiff_t(free_vertices[i]) * d, d);
    return r;
}

Eigen::VectorXd SparseSystem::expand(const Eigen::VectorXd& reduced, int num_vertices) const {
    const int d = dim();
    Eigen::VectorXd full = Eigen::VectorXd::Zero(std::ptrdiff_t(num_vertices) * d);
    for (std::size_t i = 0; i < free_vertices.size(); ++i)
        full.segment(std::ptrdiff_t(free_vertices[i]) * d, d) = reduced.segment(std::ptrdiff_t(i) * d, d);
    return full;
}

SparseSystem assemble_H_plus(const Eigen::VectorXd& U, const Instance& inst, const EnergyParams& params) {
    const int d = inst.dim;
    SparseSystem sys;
    sys.vertex_to_row.assign(inst.num_vertices, -1);
    for (int v = 0; v < inst.num_vertices; ++v) {
        if (inst.locked[v]) continue;
        sys.vertex_to_row[v] = int(sys.free_vertices.size());
        sys.free_vertices.push_back(v);
    }
    sys.translation_null_space = inst.num_locked() == 0;

    std::vector<std::vector<int>> pattern(sys.free_vertices.size());
    for (std::size_t r = 0; r < pattern.size(); ++r) pattern[r].push_back(int(r));
    for (const CornerSimplex& c : inst.corners)
        for (int j = 0; j <= d; ++j) {
            const int rj = sys.vertex_to_row[c.verts[j]];
            if (rj < 0) continue;
            for (int i = 0; i <= d; ++i) {
                const int ri = sys.vertex_to_row[c.verts[i]];
                if (ri >= 0) pattern[rj].push_back(ri);
            }
        }
    sys.H = BlockSparseMatrix(d, std::move(pattern));

    std::vector<LocalMat> local(inst.corners.size());
    parallel_for(local.size(), params.threads, [&](std::size_t n) {
        const CornerSimplex& c = inst.corners[n];
        const ElementEval e = element_energy(c, U, params);
        const KronMat K = kron_identity(c.Z);
        local[n].noalias() = c.weight * K * corner_M_plus(e, params).M_plus * K.transpose();
    });

    for (std::size_t n = 0; n < local.size(); ++n) {
        const CornerSimplex& c = inst.corners[n];
        for (int j = 0; j <= d; ++j) {
            const int rj = sys.vertex_to_row[c.verts[j]];
            if (rj < 0) continue;
            for (int i = 0; i <= d; ++i) {
                const int ri = sys.vertex_to_row[c.verts[i]];
                if (ri < 0) continue;
                sys.H.block(sys.H.find(rj, ri)) += local[n].block(j * d, i * d, d, d);
            }
        }
    }
    return sys;
}

}  // namespace untangle
