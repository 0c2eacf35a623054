#include "untangle/fixtures.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "untangle/energy.hpp"

namespace untangle {

namespace {

// (nx+1) x (ny+1) grid over [0, nx h] x [0, ny h], two triangles per cell.
MeshPair grid_2d(int nx, int ny, double h) {
    MeshPair m;
    m.dim = 2;
    const int nv = (nx + 1) * (ny + 1);
    m.rest.resize(2 * nv);
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            m.rest(2 * id(i, j)) = i * h;
            m.rest(2 * id(i, j) + 1) = j * h;
        }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            m.elements.push_back({ElementKind::triangle, {id(i, j), id(i + 1, j), id(i + 1, j + 1), 0}});
            m.elements.push_back({ElementKind::triangle, {id(i, j), id(i + 1, j + 1), id(i, j + 1), 0}});
        }
    m.initial_map = m.rest;
    m.locked.assign(nv, false);
    return m;
}

}  // namespace

Fixture point_swap_square(int n) {
    if (n < 4) throw std::invalid_argument("point_swap_square needs n >= 4");
    Fixture fx{"point_swap_square", grid_2d(n, n, 1.0 / n), TargetPolicy::rest_shape};
    MeshPair& m = fx.mesh;
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) m.locked[id(i, j)] = (i == 0 || j == 0 || i == n || j == n);
    const int a = id(n / 3, n / 2), b = id(n - n / 3, n / 2);
    const Eigen::Vector2d pa = m.initial_map.segment(2 * a, 2);
    m.initial_map.segment(2 * a, 2) = m.initial_map.segment(2 * b, 2);
    m.initial_map.segment(2 * b, 2) = pa;
    return fx;
}

Fixture triangle_fan_12() {
    Fixture fx{"triangle_fan_12", {}, TargetPolicy::regular};
    MeshPair& m = fx.mesh;
    m.dim = 2;
    m.rest = Eigen::VectorXd::Zero(2 * 13);
    for (int i = 0; i < 12; ++i) {
        const double t = 2.0 * std::numbers::pi * i / 12.0;
        m.rest(2 * (i + 1)) = std::cos(t);
        m.rest(2 * (i + 1) + 1) = std::sin(t);
        m.elements.push_back({ElementKind::triangle, {0, i + 1, (i + 1) % 12 + 1, 0}});
    }
    m.initial_map = m.rest;
    m.locked.assign(13, false);
    return fx;
}

Fixture cavity_cube(int n, double angle_deg) {
    if (n < 4 || n % 4 != 0) throw std::invalid_argument("cavity_cube needs n divisible by 4");
    Fixture fx{"cavity_cube", {}, TargetPolicy::rest_shape};
    MeshPair& m = fx.mesh;
    m.dim = 3;
    const int lo = n / 4, hi = n - n / 4;
    const double h = 2.0 / n;
    auto in_cavity_cell = [&](int i, int j, int k) { return i >= lo && i < hi && j >= lo && j < hi && k >= lo && k < hi; };
    auto strictly_inside = [&](int i, int j, int k) { return i > lo && i < hi && j > lo && j < hi && k > lo && k < hi; };
    auto on_inner = [&](int i, int j, int k) {
        return i >= lo && i <= hi && j >= lo && j <= hi && k >= lo && k <= hi && !strictly_inside(i, j, k);
    };

    std::vector<int> index((n + 1) * (n + 1) * (n + 1), -1);
    auto grid = [n](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };
    std::vector<double> coords;
    std::vector<bool> inner;
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) {
                if (strictly_inside(i, j, k)) continue;
                index[grid(i, j, k)] = int(inner.size());
                coords.insert(coords.end(), {-1.0 + i * h, -1.0 + j * h, -1.0 + k * h});
                inner.push_back(on_inner(i, j, k));
                m.locked.push_back(i == 0 || j == 0 || k == 0 || i == n || j == n || k == n || inner.back());
            }
    m.rest = Eigen::Map<Eigen::VectorXd>(coords.data(), Eigen::Index(coords.size()));

    // Kuhn subdivision: one tet per monotone path from corner 000 to 111.
    static constexpr int kPaths[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                if (in_cavity_cell(i, j, k)) continue;
                for (const auto& path : kPaths) {
                    std::array<int, 3> c{i, j, k};
                    std::array<int, 4> v{};
                    v[0] = index[grid(c[0], c[1], c[2])];
                    for (int s = 0; s < 3; ++s) {
                        ++c[path[s]];
                        v[s + 1] = index[grid(c[0], c[1], c[2])];
                    }
                    Mat S(3, 3);
                    for (int s = 0; s < 3; ++s) S.col(s) = m.rest.segment(3 * v[s + 1], 3) - m.rest.segment(3 * v[0], 3);
                    if (determinant(S) < 0) std::swap(v[1], v[2]);
                    m.elements.push_back({ElementKind::tetrahedron, v});
                }
            }

    m.initial_map = m.rest;
    const double t = angle_deg * std::numbers::pi / 180.0;
    const double cs = std::cos(t), sn = std::sin(t);
    for (std::size_t v = 0; v < inner.size(); ++v) {
        if (!inner[v]) continue;
        const double x = m.rest(3 * v), y = m.rest(3 * v + 1);
        m.initial_map(3 * v) = cs * x - sn * y;
        m.initial_map(3 * v + 1) = sn * x + cs * y;
    }
    return fx;
}

Fixture stretched_bar(int nx, int ny, double factor) {
    if (nx < 1 || ny < 1 || !(factor > 0)) throw std::invalid_argument("stretched_bar: invalid parameters");
    Fixture fx{"stretched_bar", grid_2d(nx, ny, 1.0 / ny), TargetPolicy::rest_shape};
    MeshPair& m = fx.mesh;
    for (int j = 0; j <= ny; ++j) {
        m.locked[j * (nx + 1)] = true;
        m.locked[j * (nx + 1) + nx] = true;
    }
    for (int v = 0; v < m.num_vertices(); ++v) m.initial_map(2 * v) *= factor;
    return fx;
}

Fixture generate_fixture(const std::string& name, const FixtureParams& params) {
    if (name == "point_swap_square") return point_swap_square(params.n);
    if (name == "triangle_fan_12") return triangle_fan_12();
    if (name == "cavity_cube") return cavity_cube(params.n, params.angle_deg);
    if (name == "stretched_bar") return stretched_bar(params.n, params.ny, params.factor);
    throw std::invalid_argument("unknown fixture '" + name + "'");
}

}  // namespace untangle
