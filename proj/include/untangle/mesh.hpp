#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "untangle/types.hpp"

namespace untangle {

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ElementKind { triangle, quad, tetrahedron };

struct Element {
    ElementKind kind = ElementKind::triangle;
    std::array<int, 4> v{};   // triangles use the first three slots

    [[nodiscard]] int size() const noexcept { return kind == ElementKind::triangle ? 3 : 4; }
};

// How the ideal ("target") shape of each element is chosen.
enum class TargetPolicy {
    rest_shape,   // the rest element itself (untangling)
    regular,      // unit equilateral simplex / unit square (mapping quality)
};

// Problem instance: rest geometry, connectivity, locks and the starting map.
// Coordinates are stored vertex-major: x[dim * v + c].
struct MeshPair {
    int dim = 2;
    Eigen::VectorXd rest;
    Eigen::VectorXd initial_map;
    std::vector<Element> elements;
    std::vector<bool> locked;

    [[nodiscard]] int num_vertices() const noexcept { return dim > 0 ? int(rest.size()) / dim : 0; }
    [[nodiscard]] int num_locked() const noexcept;

    // Fewer than dim locked vertices leave rigid motions unconstrained.
    [[nodiscard]] bool free_boundary() const noexcept { return num_locked() < dim; }

    // Throws MeshError when an invariant is broken.
    void validate() const;
};

// One simplex of the quadrature: a triangle/tet itself, or one corner
// triangle of a quad.
struct CornerSimplex {
    int element = 0;
    int corner = 0;
    std::array<int, 4> verts{};   // dim + 1 used
    Mat S;                        // target shape matrix, det S > 0
    double weight = 0;            // quadrature_fraction * det S / d!
    ZMat Z;                       // J = (u_0 ... u_d) Z
};

struct Instance {
    int dim = 2;
    int num_vertices = 0;
    std::vector<CornerSimplex> corners;
    std::vector<bool> locked;

    [[nodiscard]] int num_locked() const noexcept;
    [[nodiscard]] bool free_boundary() const noexcept { return num_locked() < dim; }
};

// Quadrature fraction of a quad corner; the four corners together integrate
// the trapezoidal rule exactly over the quad area.
inline constexpr double kQuadCornerFraction = 0.5;

[[nodiscard]] Instance build_instance(const MeshPair& mesh, TargetPolicy policy);

// Gradient matrix Z = [-1 ... -1; I] S^-1.
[[nodiscard]] ZMat gradient_matrix(const Mat& S);

// Map-space vertices of a corner as columns.
[[nodiscard]] VertMat gather(const CornerSimplex& corner, const Eigen::VectorXd& U, int dim);

[[nodiscard]] Mat compute_jacobian(const CornerSimplex& corner, const Eigen::VectorXd& U);

// Optimization variable plus continuation bookkeeping.
struct MapState {
    Eigen::VectorXd U;
    int iteration = 0;
    double eps = 1.0;
};

[[nodiscard]] std::string to_string(ElementKind kind);
[[nodiscard]] std::string to_string(TargetPolicy policy);
[[nodiscard]] TargetPolicy parse_target_policy(const std::string& name);

}  // namespace untangle
