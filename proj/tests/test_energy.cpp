#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "untangle/energy.hpp"
#include "untangle/fixtures.hpp"

using namespace untangle;

TEST_CASE("chi values") {
    CHECK(chi(0, 2) == 1.0);
    CHECK(chi(3, 4) == 4.0);
    CHECK(chi(-3, 4) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(chi(5, 0) == 5.0);
    CHECK(chi_prime(0, 0.3) == 0.5);
    CHECK(chi_prime(3, 4) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(chi_prime(2, 0) == 1.0);
    CHECK_THROWS_AS((void)chi(0, 0), std::domain_error);
    CHECK_THROWS_AS((void)chi(-1, 0), std::domain_error);
    CHECK_THROWS_AS((void)chi(1, -1), std::domain_error);
    CHECK_THROWS_AS((void)chi_prime(-1, 0), std::domain_error);
}

TEST_CASE("chi limits and positivity") {
    CHECK(chi(2.0, 1e-9) == doctest::Approx(2.0).epsilon(1e-15));
    // The rationalized branch keeps chi positive far past the point where
    // the textbook formula cancels to zero.
    CHECK(chi(-1e8, 1.0) > 0);
    CHECK(chi(-1e8, 1.0) == doctest::Approx(0.25e-8).epsilon(1e-12));
    CHECK(chi(-1.0, 1e-9) > 0);
    for (double D : {-2.0, -0.1, 0.0, 0.3, 5.0}) {
        const double xp = chi_prime(D, 0.7);
        CHECK(xp > 0);
        CHECK(xp < 1);
    }
}

TEST_CASE("chi derivatives match finite differences") {
    for (double D : {-3.0, -0.2, 0.0, 0.4, 2.0})
        for (double eps : {0.1, 1.0}) {
            const double h = 1e-5;
            CHECK(chi_prime(D, eps) == doctest::Approx((chi(D + h, eps) - chi(D - h, eps)) / (2 * h)).epsilon(1e-8));
            CHECK(chi_second(D, eps) ==
                  doctest::Approx((chi_prime(D + h, eps) - chi_prime(D - h, eps)) / (2 * h)).epsilon(1e-7));
            CHECK(chi_eps(D, eps) == doctest::Approx((chi(D, eps + h) - chi(D, eps - h)) / (2 * h)).epsilon(1e-8));
        }
}

TEST_CASE("chi is increasing in eps") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> D(-10, 10), e(1e-6, 5);
    for (int i = 0; i < 1000; ++i) {
        const double d = D(rng), e1 = e(rng), e2 = e(rng);
        CHECK(chi_eps(d, e1) > 0);
        CHECK((chi(d, std::max(e1, e2)) >= chi(d, std::min(e1, e2))));
    }
}

TEST_CASE("element energy examples") {
    const EnergyParams exact{1.0, 0.0};
    Mat J = Eigen::Matrix2d::Identity();
    ElementEval e = evaluate(J, exact);
    CHECK(e.f == 2.0);
    CHECK(e.g == 2.0);
    CHECK(e.phi == 4.0);

    J = Eigen::Vector2d(2.0, 0.5).asDiagonal();
    e = evaluate(J, exact);
    CHECK(e.f == doctest::Approx(4.25).epsilon(1e-15));
    CHECK(e.g == doctest::Approx(2.0).epsilon(1e-15));

    J = Eigen::Vector2d(-1.0, 1.0).asDiagonal();
    e = evaluate(J, EnergyParams{1.0, 1.0});
    CHECK(e.chi == doctest::Approx((std::sqrt(2.0) - 1.0) / 2.0).epsilon(1e-14));
    CHECK(e.f == doctest::Approx(9.6568542495).epsilon(1e-10));
    CHECK(e.g == doctest::Approx(9.6568542495).epsilon(1e-10));
}

TEST_CASE("eps = 0 on an inverted element is infinite, not an exception") {
    const Mat J = Eigen::Vector2d(-1.0, 1.0).asDiagonal();
    const ElementEval e = evaluate(J, EnergyParams{1.0, 0.0});
    CHECK(std::isinf(e.phi));
}

TEST_CASE("dual basis") {
    std::mt19937_64 rng(5);
    for (int d = 2; d <= 3; ++d)
        for (int t = 0; t < 50; ++t) {
            const Mat J = oracle::random_matrix(rng, d, d);
            const Mat B = dual_basis(J);
            const double D = J.determinant();
            CHECK((J.transpose() * B - D * Mat::Identity(d, d)).norm() <= 1e-12 * (1.0 + std::abs(D)));
            if (d == 3) {
                for (int k = 0; k < 3; ++k) {
                    const Eigen::Vector3d ai = J.col((k + 1) % 3), aj = J.col((k + 2) % 3);
                    CHECK((B.col(k) - ai.cross(aj)).norm() < 1e-14 * (1.0 + J.squaredNorm()));
                }
            }
        }
}

TEST_CASE("element energy agrees with the reference formula") {
    std::mt19937_64 rng(17);
    for (int d = 2; d <= 3; ++d)
        for (int t = 0; t < 100; ++t) {
            const Mat J = oracle::random_matrix(rng, d, d);
            const EnergyParams p{0.7, 0.3};
            CHECK(evaluate(J, p).phi == doctest::Approx(oracle::phi(J, p.lambda, p.eps)).epsilon(1e-12));
        }
}

TEST_CASE("rotation invariance") {
    std::mt19937_64 rng(19);
    for (int d = 2; d <= 3; ++d)
        for (int t = 0; t < 50; ++t) {
            const Mat J = oracle::random_matrix(rng, d, d);
            const Mat R = oracle::random_rotation(rng, d), Q = oracle::random_rotation(rng, d);
            const EnergyParams p{1.3, 0.2};
            const double phi = evaluate(J, p).phi;
            CHECK(evaluate(R * J, p).phi == doctest::Approx(phi).epsilon(1e-10));
            CHECK(evaluate(J * Q, p).phi == doctest::Approx(phi).epsilon(1e-10));
        }
}

TEST_CASE("f is scale invariant and g is bounded below") {
    std::mt19937_64 rng(23);
    const EnergyParams exact{1.0, 0.0};
    for (int d = 2; d <= 3; ++d)
        for (int t = 0; t < 50; ++t) {
            Mat J = oracle::random_matrix(rng, d, d);
            if (J.determinant() < 0) J.col(0) *= -1.0;
            const ElementEval e = evaluate(J, exact);
            CHECK(evaluate(2.7 * J, exact).f == doctest::Approx(e.f).epsilon(1e-12));
            CHECK(e.g >= 2.0);
        }
    CHECK(evaluate(Mat(Eigen::Vector3d(2.0, 0.5, 1.0).asDiagonal()), exact).g == doctest::Approx(2.0));
}

TEST_CASE("total energy") {
    MeshPair m;
    m.dim = 2;
    m.rest.resize(6);
    m.rest << 0, 0, 1, 0, 0, 1;
    m.initial_map = m.rest;
    m.elements = {{ElementKind::triangle, {0, 1, 2, 0}}};
    m.locked.assign(3, false);
    const Instance inst = build_instance(m, TargetPolicy::rest_shape);
    CHECK(total_energy(m.rest, inst, EnergyParams{1.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(gradient(m.rest, inst, EnergyParams{1.0, 0.0}).norm() < 1e-14);

    Eigen::VectorXd collapsed = m.rest;
    collapsed.segment(4, 2) = collapsed.segment(2, 2);
    CHECK(std::isfinite(total_energy(collapsed, inst, EnergyParams{1.0, 1e-6})));
    CHECK(std::isinf(total_energy(collapsed, inst, EnergyParams{1.0, 0.0})));
}

TEST_CASE("gradient matches finite differences of the reference energy") {
    std::mt19937_64 rng(29);
    for (const Fixture& fx : {point_swap_square(4), cavity_cube(4, 20.0)}) {
        const Instance inst = build_instance(fx.mesh, fx.policy);
        const int d = inst.dim;
        for (double eps : {1.0, 1e-3})
            for (double lambda : {0.0, 1.0, 1e4})
                for (int t = 0; t < 2; ++t) {
                    const Eigen::VectorXd U =
                        fx.mesh.rest + oracle::random_matrix(rng, int(fx.mesh.rest.size()), 1, 0.05);
                    const EnergyParams p{lambda, eps};
                    const Eigen::VectorXd g = gradient(U, inst, p);
                    auto F = [&](const Eigen::VectorXd& V) {
                        double s = 0;
                        for (const CornerSimplex& c : inst.corners)
                            s += c.weight * oracle::phi(compute_jacobian(c, V), lambda, eps);
                        return s;
                    };
                    Eigen::VectorXd fd = oracle::fd_gradient(F, U, 1e-5);
                    for (int v = 0; v < inst.num_vertices; ++v)
                        if (inst.locked[v]) fd.segment(d * v, d).setZero();
                    CHECK(oracle::rel_error(g, fd) < 1e-6);
                }
    }
}

TEST_CASE("gradient is translation invariant and zero on locked vertices") {
    const Fixture fx = point_swap_square(6);
    const Instance inst = build_instance(fx.mesh, fx.policy);
    const EnergyParams p{1.0, 0.1};
    const Eigen::VectorXd g = gradient(fx.mesh.initial_map, inst, p);
    Eigen::VectorXd shifted = fx.mesh.initial_map;
    for (int v = 0; v < inst.num_vertices; ++v) shifted.segment(2 * v, 2) += Eigen::Vector2d(0.25, -1.5);
    CHECK((gradient(shifted, inst, p) - g).norm() <= 1e-12 * g.norm());
    for (int v = 0; v < inst.num_vertices; ++v)
        if (inst.locked[v]) CHECK(g.segment(2 * v, 2).norm() == 0.0);
}

TEST_CASE("energy is independent of the thread count") {
    const Fixture fx = cavity_cube(8, 45.0);
    const Instance inst = build_instance(fx.mesh, fx.policy);
    EnergyParams p{1.0, 0.05, 1};
    Eigen::VectorXd g1, g4;
    const double f1 = energy_and_gradient(fx.mesh.initial_map, inst, p, g1);
    p.threads = 4;
    const double f4 = energy_and_gradient(fx.mesh.initial_map, inst, p, g4);
    CHECK(f1 == f4);
    CHECK(g1 == g4);
}
