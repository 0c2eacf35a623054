#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "untangle/fixtures.hpp"
#include "untangle/hessian.hpp"
#include "untangle/solver.hpp"

using namespace untangle;

TEST_CASE("theory epsilon rule") {
    CHECK(update_epsilon_theory(1.0, 0.2, 0.1) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(update_epsilon_theory(4.0, -3.0, 0.1) == doctest::Approx(3.75).epsilon(1e-15));
    // Far from the fold-free region the factor tends to 1 - sigma / 2.
    CHECK(update_epsilon_theory(1.0, -1e9, 0.1) == doctest::Approx(0.95).epsilon(1e-9));
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> D(-5, 5), e(1e-8, 2), s(0.1, 0.99);
    for (int i = 0; i < 1000; ++i) {
        const double eps = e(rng), d = D(rng), sigma = s(rng);
        const double next = update_epsilon_theory(eps, d, sigma);
        CHECK(next > 0);
        CHECK(next < eps);
        CHECK((1 - sigma) * chi(d, eps) <= chi(d, next) * (1 + 1e-12));
    }
}

TEST_CASE("heuristic epsilon rule") {
    CHECK(update_epsilon_heuristic(0.3) == doctest::Approx(1e-6).epsilon(1e-12));
    CHECK(update_epsilon_heuristic(0.0) == doctest::Approx(1e-6).epsilon(1e-12));
    CHECK(update_epsilon_heuristic(-0.5) == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(update_epsilon_heuristic(-1.0) == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("sigma_k") {
    CHECK(sigma_k(2.0, 1.0) == 0.5);
    CHECK(sigma_k(1.0, 0.999) == 0.1);
    CHECK(sigma_k(1.0, 1.0) == 0.1);
}

TEST_CASE("min_det") {
    const Fixture fx = point_swap_square(8);
    const Instance inst = build_instance(fx.mesh, fx.policy);
    CHECK(min_det(fx.mesh.rest, inst) == doctest::Approx(1.0));
    CHECK(min_det(fx.mesh.initial_map, inst) < 0);
}

TEST_CASE("L-BFGS on a quadratic") {
    Eigen::VectorXd c(5);
    c << 1, -2, 3, 0.5, 4;
    const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(5, 1, 50);
    Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = w.cwiseProduct(x - c);
        return 0.5 * (x - c).dot(g);
    };
    Eigen::VectorXd x = Eigen::VectorXd::Zero(5);
    const LbfgsResult r = lbfgs(f, x);
    CHECK(r.converged);
    CHECK((x - c).norm() < 1e-8);
}

TEST_CASE("L-BFGS on Rosenbrock") {
    Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g.resize(2);
        g(0) = -400 * x(0) * (x(1) - x(0) * x(0)) - 2 * (1 - x(0));
        g(1) = 200 * (x(1) - x(0) * x(0));
        return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2);
    };
    Eigen::VectorXd x(2);
    x << -1.2, 1.0;
    const LbfgsResult r = lbfgs(f, x);
    CHECK(r.converged);
    CHECK((x - Eigen::Vector2d(1, 1)).norm() < 1e-6);
}

TEST_CASE("quasi-Newton returns immediately at a minimizer") {
    const Fixture fx = point_swap_square(6);
    const Instance inst = build_instance(fx.mesh, fx.policy);
    const EnergyParams p{1.0, 1e-9};
    const double f0 = total_energy(fx.mesh.rest, inst, p);
    const InnerResult r = quasi_newton_minimize(fx.mesh.rest, inst, p, LbfgsOptions{});
    CHECK(r.iterations == 0);
    CHECK(total_energy(r.U, inst, p) == doctest::Approx(f0).epsilon(1e-12));
}

namespace {

// Four triangles around vertex 0, mirror symmetric about the x axis. Only
// vertex 0 is free and the left neighbor is pulled outward in the map, so
// the minimizer lies on the axis and is found by a scalar search.
MeshPair diamond() {
    MeshPair m;
    m.dim = 2;
    m.rest.resize(10);
    m.rest << 0, 0, 2, 0, 0, 1, -1, 0, 0, -1;
    m.initial_map = m.rest;
    m.initial_map(0) = 0.3;
    m.initial_map(6) = -1.5;
    m.elements = {{ElementKind::triangle, {0, 1, 2, 0}},
                  {ElementKind::triangle, {0, 2, 3, 0}},
                  {ElementKind::triangle, {0, 3, 4, 0}},
                  {ElementKind::triangle, {0, 4, 1, 0}}};
    m.locked = {false, true, true, true, true};
    return m;
}

}  // namespace

TEST_CASE("one free vertex: minimizer agrees with a scalar search") {
    const MeshPair m = diamond();
    const Instance inst = build_instance(m, TargetPolicy::rest_shape);
    const EnergyParams p{1.0, 1e-3};

    auto F1 = [&](double x) {
        Eigen::VectorXd U = m.initial_map;
        U(0) = x;
        return total_energy(U, inst, p);
    };
    // Golden section to bracket, then bisection on the sign of a
    // finite-difference slope, which resolves the optimum far below sqrt(eps).
    double lo = -0.9, hi = 1.9;
    const double r = (std::sqrt(5.0) - 1) / 2;
    for (int i = 0; i < 30; ++i) {
        const double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
        if (F1(a) < F1(b))
            hi = b;
        else
            lo = a;
    }
    auto slope = [&](double x) {
        const double h = 1e-5;
        return (-F1(x + 2 * h) + 8 * F1(x + h) - 8 * F1(x - h) + F1(x - 2 * h)) / (12 * h);
    };
    REQUIRE(slope(lo) < 0);
    REQUIRE(slope(hi) > 0);
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) < 0 ? lo : hi) = mid;
    }
    const double x_star = 0.5 * (lo + hi);

    LbfgsOptions opt;
    opt.grad_tol = 1e-14;
    const InnerResult res = quasi_newton_minimize(m.initial_map, inst, p, opt);
    CHECK(res.U(0) == doctest::Approx(x_star).epsilon(1e-8));
    CHECK(std::abs(res.U(1)) < 1e-8);
}

TEST_CASE("Newton step on an identity system") {
    // With H+ replaced by the identity the solve returns the gradient itself.
    const MeshPair m = diamond();
    const Instance inst = build_instance(m, TargetPolicy::rest_shape);
    const EnergyParams p{1.0, 0.5};
    const SparseSystem sys = assemble_H_plus(m.initial_map, inst, p);
    REQUIRE(sys.H.rows() == 2);
    BlockSparseMatrix I(2, {{0}});
    I.block(0) = Eigen::Matrix2d::Identity();
    const Eigen::Vector2d g = sys.restrict(gradient(m.initial_map, inst, p));
    const CgResult cg = block_jacobi_pcg(I, g, CgOptions{});
    CHECK((cg.x - g).norm() == 0.0);

    SolverConfig cfg;
    const InnerResult step = newton_step(m.initial_map, inst, p, cfg);
    CHECK(total_energy(step.U, inst, p) < total_energy(m.initial_map, inst, p));
}

TEST_CASE("Newton steps never increase the energy") {
    std::mt19937_64 rng(67);
    const Fixture fx = point_swap_square(6);
    const Instance inst = build_instance(fx.mesh, fx.policy);
    SolverConfig cfg;
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd U = fx.mesh.rest + oracle::random_matrix(rng, int(fx.mesh.rest.size()), 1, 0.08);
        for (int v = 0; v < inst.num_vertices; ++v)
            if (inst.locked[v]) U.segment(2 * v, 2) = fx.mesh.rest.segment(2 * v, 2);
        const EnergyParams p{t % 2 ? 1.0 : 10.0, t % 3 ? 0.01 : 0.5};
        const double f0 = total_energy(U, inst, p);
        const InnerResult r = newton_step(U, inst, p, cfg);
        CHECK(total_energy(r.U, inst, p) <= f0);
        for (int v = 0; v < inst.num_vertices; ++v)
            if (inst.locked[v]) CHECK(r.U.segment(2 * v, 2) == U.segment(2 * v, 2));
    }
}

TEST_CASE("Newton step on a free mesh stays finite") {
    const Fixture fx = triangle_fan_12();
    const Instance inst = build_instance(fx.mesh, fx.policy);
    const InnerResult r = newton_step(fx.mesh.initial_map, inst, EnergyParams{1.0, 0.1}, SolverConfig{});
    CHECK(r.U.allFinite());
    CHECK_FALSE(r.cg_fallback);
}

TEST_CASE("line search returns zero when there is no descent") {
    const Fixture fx = point_swap_square(4);
    const Instance inst = build_instance(fx.mesh, fx.policy);
    const EnergyParams p{1.0, 1e-3};
    const double f0 = total_energy(fx.mesh.rest, inst, p);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(fx.mesh.rest.size());
    dir(2 * 6) = 1.0;
    // Moving a vertex of the rest-shape minimizer either way only increases F.
    CHECK(line_search(fx.mesh.rest, dir, f0, 0.0, inst, p, LineSearchOptions{}) == 0.0);
}

TEST_CASE("untangle: already fold-free input is a fixed point") {
    const Fixture fx = point_swap_square(6);
    MeshPair m = fx.mesh;
    m.initial_map = m.rest;
    for (Scheme s : {Scheme::quasi_newton, Scheme::newton}) {
        SolverConfig cfg;
        cfg.scheme = s;
        const UntangleResult r = untangle::untangle(m, fx.policy, cfg);
        CHECK(r.success);
        CHECK(r.trace.records.size() <= 2);
        CHECK((r.state.U - m.rest).norm() < 1e-6);
    }
}

TEST_CASE("untangle point swap under every scheme and rule") {
    const Fixture fx = point_swap_square(8);
    for (Scheme s : {Scheme::quasi_newton, Scheme::newton, Scheme::automatic})
        for (EpsRule e : {EpsRule::theory, EpsRule::heuristic}) {
            CAPTURE(to_string(s));
            CAPTURE(to_string(e));
            SolverConfig cfg;
            cfg.scheme = s;
            cfg.eps_rule = e;
            const UntangleResult r = untangle::untangle(fx.mesh, fx.policy, cfg);
            CHECK(r.success);
            CHECK(r.quality.min_det > 0);
            const Instance inst = build_instance(fx.mesh, fx.policy);
            for (int v = 0; v < inst.num_vertices; ++v)
                if (inst.locked[v]) CHECK(r.state.U.segment(2 * v, 2) == fx.mesh.initial_map.segment(2 * v, 2));

            const auto& rec = r.trace.records;
            REQUIRE_FALSE(rec.empty());
            for (std::size_t k = 0; k < rec.size(); ++k) {
                CHECK(rec[k].eps > 0);
                CHECK(rec[k].f_after <= rec[k].f_before);
                if (k > 0) CHECK(rec[k].eps == rec[k - 1].eps_next);
                if (e == EpsRule::theory) {
                    CHECK(rec[k].eps_next < rec[k].eps);
                    CHECK(rec[k].suff_cond_checked);
                    CHECK(rec[k].suff_cond_holds);
                    if (rec[k].non_growth_checked) CHECK(rec[k].non_growth_holds);
                }
            }
        }
}

TEST_CASE("untangle the free-boundary fan") {
    const Fixture fx = triangle_fan_12();
    const UntangleResult r = untangle::untangle(fx.mesh, fx.policy, SolverConfig{});
    CHECK(r.success);
    const Instance inst = build_instance(fx.mesh, fx.policy);
    CHECK(std::isfinite(total_energy(r.state.U, inst, EnergyParams{1.0, 1e-9})));
}

TEST_CASE("budget exhaustion is a flagged failure, not an exception") {
    const Fixture fx = cavity_cube(8, 45.0);
    SolverConfig cfg;
    cfg.max_outer = 1;
    cfg.lbfgs.max_iterations = 2;
    const UntangleResult r = untangle::untangle(fx.mesh, fx.policy, cfg);
    CHECK_FALSE(r.success);
    CHECK(r.trace.records.size() == 1);
}

TEST_CASE("configuration validation") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.sigma_floor = 1.0;
    CHECK_THROWS(cfg.validate());
    cfg = SolverConfig{};
    cfg.stagnation = 0.0;
    CHECK_THROWS(cfg.validate());
    cfg = SolverConfig{};
    cfg.lambda = -1;
    CHECK_THROWS(cfg.validate());
    CHECK(parse_scheme("auto") == Scheme::automatic);
    CHECK(parse_eps_rule("theory") == EpsRule::theory);
    CHECK_THROWS((void)parse_scheme("gradient"));
}
