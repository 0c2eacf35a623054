#include "untangle/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>

namespace untangle {

namespace {

double factorial(int d) { return d == 2 ? 2.0 : 6.0; }

Mat regular_simplex(int dim) {
    Mat S(dim, dim);
    if (dim == 2) {
        S << 1.0, 0.5,
             0.0, std::sqrt(3.0) / 2.0;
    } else {
        S << 1.0, 0.5,                    0.5,
             0.0, std::sqrt(3.0) / 2.0,   std::sqrt(3.0) / 6.0,
             0.0, 0.0,                    std::sqrt(2.0 / 3.0);
    }
    return S;
}

Vec point(const Eigen::VectorXd& x, int dim, int v) {
    return x.segment(std::ptrdiff_t(dim) * v, dim);
}

double bbox_diagonal(const MeshPair& mesh) {
    const int nv = mesh.num_vertices();
    if (nv == 0) return 0.0;
    Vec lo = point(mesh.rest, mesh.dim, 0), hi = lo;
    for (int v = 1; v < nv; ++v) {
        const Vec p = point(mesh.rest, mesh.dim, v);
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

CornerSimplex make_corner(int element, int corner, std::span<const int> verts, Mat S,
                          double fraction, double tolerance) {
    const int dim = int(S.rows());
    double det = S.determinant();
    if (std::abs(det) < tolerance) {
        throw MeshError("element " + std::to_string(element) + " (corner " + std::to_string(corner) +
                        ") has a degenerate target shape, |det S| = " + std::to_string(std::abs(det)));
    }
    if (det < 0) {
        // Reflect the target, never the map.
        S.row(dim - 1) *= -1.0;
        det = -det;
    }
    CornerSimplex c;
    c.element = element;
    c.corner = corner;
    std::copy(verts.begin(), verts.end(), c.verts.begin());
    c.S = S;
    c.weight = fraction * det / factorial(dim);
    c.Z = gradient_matrix(S);
    return c;
}

}  // namespace

int MeshPair::num_locked() const noexcept {
    return int(std::count(locked.begin(), locked.end(), true));
}

int Instance::num_locked() const noexcept {
    return int(std::count(locked.begin(), locked.end(), true));
}

void MeshPair::validate() const {
    if (dim != 2 && dim != 3) throw MeshError("dimension must be 2 or 3, got " + std::to_string(dim));
    if (rest.size() % dim != 0) throw MeshError("rest coordinate count is not a multiple of the dimension");
    const int nv = num_vertices();
    if (initial_map.size() != rest.size())
        throw MeshError("initial map has " + std::to_string(initial_map.size() / dim) + " vertices, rest mesh has " +
                        std::to_string(nv));
    if (int(locked.size()) != nv) throw MeshError("lock flags do not match the vertex count");
    if (!rest.allFinite() || !initial_map.allFinite()) throw MeshError("non-finite vertex coordinate");

    for (std::size_t e = 0; e < elements.size(); ++e) {
        const Element& el = elements[e];
        const std::string name = "element " + std::to_string(e);
        if (el.kind == ElementKind::quad && dim != 2) throw MeshError(name + ": quads are only supported in 2D");
        if (el.kind == ElementKind::triangle && dim != 2) throw MeshError(name + ": triangle in a 3D mesh");
        if (el.kind == ElementKind::tetrahedron && dim != 3) throw MeshError(name + ": tetrahedron in a 2D mesh");
        const int n = el.size();
        for (int i = 0; i < n; ++i) {
            if (el.v[i] < 0 || el.v[i] >= nv)
                throw MeshError(name + ": vertex index " + std::to_string(el.v[i]) + " out of range");
            for (int j = 0; j < i; ++j)
                if (el.v[i] == el.v[j]) throw MeshError(name + ": repeated vertex index " + std::to_string(el.v[i]));
        }
    }
}

ZMat gradient_matrix(const Mat& S) {
    const int dim = int(S.rows());
    const Mat inv = S.inverse();
    ZMat Z(dim + 1, dim);
    Z.row(0) = -inv.colwise().sum();
    Z.bottomRows(dim) = inv;
    return Z;
}

Instance build_instance(const MeshPair& mesh, TargetPolicy policy) {
    mesh.validate();
    const int dim = mesh.dim;
    const double tolerance = 1e-12 * std::pow(bbox_diagonal(mesh), dim);

    Instance inst;
    inst.dim = dim;
    inst.num_vertices = mesh.num_vertices();
    inst.locked = mesh.locked;

    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const Element& el = mesh.elements[e];
        if (el.kind == ElementKind::quad) {
            // Counterclockwise corners; each corner frame is spanned by the
            // edges to the next and previous vertex.
            for (int c = 0; c < 4; ++c) {
                const std::array<int, 3> v{el.v[c], el.v[(c + 1) % 4], el.v[(c + 3) % 4]};
                Mat S(2, 2);
                if (policy == TargetPolicy::rest_shape) {
                    const Vec x0 = point(mesh.rest, 2, v[0]);
                    S.col(0) = point(mesh.rest, 2, v[1]) - x0;
                    S.col(1) = point(mesh.rest, 2, v[2]) - x0;
                } else {
                    S.setIdentity();
                }
                inst.corners.push_back(make_corner(int(e), c, v, S, kQuadCornerFraction, tolerance));
            }
            continue;
        }
        const std::span<const int> v(el.v.data(), std::size_t(dim + 1));
        Mat S(dim, dim);
        if (policy == TargetPolicy::rest_shape) {
            const Vec x0 = point(mesh.rest, dim, v[0]);
            for (int i = 0; i < dim; ++i) S.col(i) = point(mesh.rest, dim, v[i + 1]) - x0;
        } else {
            S = regular_simplex(dim);
        }
        inst.corners.push_back(make_corner(int(e), 0, v, S, 1.0, tolerance));
    }
    return inst;
}

VertMat gather(const CornerSimplex& corner, const Eigen::VectorXd& U, int dim) {
    VertMat P(dim, dim + 1);
    for (int j = 0; j <= dim; ++j) P.col(j) = U.segment(std::ptrdiff_t(dim) * corner.verts[j], dim);
    return P;
}

Mat compute_jacobian(const CornerSimplex& corner, const Eigen::VectorXd& U) {
    const int dim = int(corner.Z.cols());
    return gather(corner, U, dim) * corner.Z;
}

std::string to_string(ElementKind kind) {
    switch (kind) {
        case ElementKind::triangle: return "triangle";
        case ElementKind::quad: return "quad";
        case ElementKind::tetrahedron: return "tetrahedron";
    }
    return "unknown";
}

std::string to_string(TargetPolicy policy) {
    return policy == TargetPolicy::rest_shape ? "rest" : "regular";
}

TargetPolicy parse_target_policy(const std::string& name) {
    if (name == "rest" || name == "rest-shape" || name == "rest_shape") return TargetPolicy::rest_shape;
    if (name == "regular") return TargetPolicy::regular;
    throw std::invalid_argument("unknown target policy '" + name + "' (expected rest or regular)");
}

}  // namespace untangle
