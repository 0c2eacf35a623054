#include "untangle/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "untangle/hessian.hpp"
#include "untangle/sparse.hpp"

namespace untangle {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<int> free_vertex_list(const Instance& inst) {
    std::vector<int> free;
    for (int v = 0; v < inst.num_vertices; ++v)
        if (!inst.locked[v]) free.push_back(v);
    return free;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(lambda >= 0)) throw std::invalid_argument("lambda must be nonnegative");
    if (!(sigma_floor > 0 && sigma_floor < 1)) throw std::invalid_argument("sigma floor must lie in (0, 1)");
    if (!(stagnation > 0 && stagnation < 1)) throw std::invalid_argument("stagnation factor must lie in (0, 1)");
    if (max_outer < 1) throw std::invalid_argument("max outer iterations must be positive");
    if (!(eps_initial > 0)) throw std::invalid_argument("initial eps must be positive");
    if (threads < 1) throw std::invalid_argument("thread count must be positive");
}

double min_det(const Eigen::VectorXd& U, const Instance& inst) {
    double m = std::numeric_limits<double>::infinity();
    for (const CornerSimplex& c : inst.corners) m = std::min(m, determinant(compute_jacobian(c, U)));
    return m;
}

double update_epsilon_theory(double eps, double min_det, double sigma) {
    if (min_det >= 0) return (1.0 - sigma) * eps;
    const double r = std::hypot(min_det, eps);
    return (1.0 - sigma * r / (std::abs(min_det) + r)) * eps;
}

double update_epsilon_heuristic(double min_det) {
    const double m = std::min(0.0, min_det);
    return std::sqrt(1e-12 + 4e-2 * m * m);
}

double update_epsilon_heuristic(const Eigen::VectorXd& U, const Instance& inst) {
    return update_epsilon_heuristic(min_det(U, inst));
}

double sigma_k(double f_prev, double f_next, double floor) {
    return std::max(floor, 1.0 - f_next / f_prev);
}

InnerResult quasi_newton_minimize(const Eigen::VectorXd& U, const Instance& inst, const EnergyParams& params,
                                  const LbfgsOptions& options) {
    const int d = inst.dim;
    const std::vector<int> free = free_vertex_list(inst);

    Eigen::VectorXd x(std::ptrdiff_t(free.size()) * d);
    for (std::size_t i = 0; i < free.size(); ++i) x.segment(std::ptrdiff_t(i) * d, d) = U.segment(std::ptrdiff_t(free[i]) * d, d);

    Eigen::VectorXd full = U, full_grad;
    const Objective objective = [&](const Eigen::VectorXd& y, Eigen::VectorXd& g) {
        for (std::size_t i = 0; i < free.size(); ++i)
            full.segment(std::ptrdiff_t(free[i]) * d, d) = y.segment(std::ptrdiff_t(i) * d, d);
        const double F = energy_and_gradient(full, inst, params, full_grad);
        g.resize(y.size());
        for (std::size_t i = 0; i < free.size(); ++i)
            g.segment(std::ptrdiff_t(i) * d, d) = full_grad.segment(std::ptrdiff_t(free[i]) * d, d);
        return F;
    };

    const LbfgsResult res = lbfgs(objective, x, options);

    InnerResult out;
    out.U = U;
    for (std::size_t i = 0; i < free.size(); ++i) out.U.segment(std::ptrdiff_t(free[i]) * d, d) = x.segment(std::ptrdiff_t(i) * d, d);
    out.iterations = res.iterations;
    out.flagged = res.line_search_failed;
    return out;
}

double line_search(const Eigen::VectorXd& U, const Eigen::VectorXd& dir, double f0, double slope,
                   const Instance& inst, const EnergyParams& params, const LineSearchOptions& options) {
    auto F = [&](double tau) { return total_energy(U - tau * dir, inst, params); };

    double best_tau = 0.0, best_f = f0;
    auto consider = [&](double tau, double f) {
        if (f < best_f) {
            best_f = f;
            best_tau = tau;
        }
    };

    // Bracket a minimum [lo, hi] around mid.
    double lo = 0.0, mid = 1.0, hi = 0.0;
    double fmid = F(mid);
    consider(mid, fmid);
    if (fmid < f0) {
        hi = options.tau_max;
        while (2.0 * mid <= options.tau_max) {
            const double f2 = F(2.0 * mid);
            consider(2.0 * mid, f2);
            if (!(f2 < fmid)) {
                hi = 2.0 * mid;
                break;
            }
            lo = mid;
            mid *= 2.0;
            fmid = f2;
        }
        hi = std::max(hi, mid);
    } else {
        bool found = false;
        for (int i = 0; i < options.max_backtracks; ++i) {
            mid *= 0.5;
            fmid = F(mid);
            consider(mid, fmid);
            if (fmid < f0) {
                found = true;
                break;
            }
        }
        if (!found) return 0.0;
        hi = 2.0 * mid;
    }

    // Golden section on [lo, hi].
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a), e = a + invphi * (b - a);
    double fc = F(c), fe = F(e);
    consider(c, fc);
    consider(e, fe);
    for (int i = 0; i < options.golden_iterations && (b - a) > 1e-12 * b; ++i) {
        if (fc < fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - invphi * (b - a);
            fc = F(c);
            consider(c, fc);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + invphi * (b - a);
            fe = F(e);
            consider(e, fe);
        }
    }

    // Armijo acceptance, backtracking from the line minimum if needed.
    auto armijo = [&](double tau, double f) { return f <= f0 - options.armijo_c1 * tau * slope; };
    if (armijo(best_tau, best_f)) return best_tau;
    double tau = best_tau;
    for (int i = 0; i < options.max_backtracks; ++i) {
        tau *= 0.5;
        const double f = F(tau);
        if (armijo(tau, f)) return tau;
    }
    return best_tau;   // still a strict decrease
}

InnerResult newton_step(const Eigen::VectorXd& U, const Instance& inst, const EnergyParams& params,
                        const SolverConfig& config) {
    InnerResult out;
    out.U = U;
    out.iterations = 1;

    Eigen::VectorXd grad;
    const double f0 = energy_and_gradient(U, inst, params, grad);
    const SparseSystem sys = assemble_H_plus(U, inst, params);
    Eigen::VectorXd rhs = sys.restrict(grad);
    if (rhs.size() == 0 || !std::isfinite(f0)) return out;

    CgOptions cg;
    cg.rel_tol = config.cg_rel_tol;
    cg.max_iterations = config.cg_max_iterations > 0 ? config.cg_max_iterations : 10 * int(rhs.size());
    cg.project_translations = sys.translation_null_space;
    CgResult solved = block_jacobi_pcg(sys.H, rhs, cg);
    out.cg_iterations = solved.iterations;

    Eigen::VectorXd step = std::move(solved.x);
    if (!solved.converged) {
        out.cg_fallback = true;
        step = rhs;
        if (sys.translation_null_space) project_out_translations(step, inst.dim);
    }
    const double slope = rhs.dot(step);
    if (!(slope > 0)) return out;

    const Eigen::VectorXd dir = sys.expand(step, inst.num_vertices);
    out.tau = line_search(U, dir, f0, slope, inst, params, config.line_search);
    if (out.tau > 0) out.U = U - out.tau * dir;
    return out;
}

UntangleResult untangle(const Instance& inst, const Eigen::VectorXd& U0, const SolverConfig& config) {
    config.validate();
    const auto start = Clock::now();

    UntangleResult result;
    Eigen::VectorXd U = U0;
    EnergyParams params{config.lambda, 0.0, config.threads};

    double eps = config.eps_rule == EpsRule::theory ? config.eps_initial : update_epsilon_heuristic(U, inst);
    eps = std::max(eps, config.eps_min);
    Scheme active = config.scheme == Scheme::newton ? Scheme::newton : Scheme::quasi_newton;
    int stalls = 0;

    for (int k = 0; k < config.max_outer; ++k) {
        const auto iter_start = Clock::now();
        IterationRecord rec;
        rec.k = k;
        rec.scheme = active;
        rec.eps = eps;
        params.eps = eps;
        rec.f_before = total_energy(U, inst, params);

        InnerResult inner = active == Scheme::newton ? newton_step(U, inst, params, config)
                                                     : quasi_newton_minimize(U, inst, params, config.lbfgs);
        rec.inner_iterations = inner.iterations;
        rec.inner_flagged = inner.flagged;
        rec.cg_fallback = inner.cg_fallback;
        result.inner_iterations += inner.iterations;

        rec.f_after = total_energy(inner.U, inst, params);
        rec.min_det = min_det(inner.U, inst);
        rec.sigma_raw = 1.0 - rec.f_after / rec.f_before;
        rec.sigma = sigma_k(rec.f_before, rec.f_after, config.sigma_floor);
        rec.descent_certified = rec.sigma_raw >= config.sigma_floor;

        if (config.eps_rule == EpsRule::theory) {
            rec.eps_next = std::max(update_epsilon_theory(eps, rec.min_det, rec.sigma), config.eps_min);
            rec.suff_cond_checked = true;
            rec.suff_cond_holds = (1.0 - rec.sigma) * chi(rec.min_det, eps) <=
                                  chi(rec.min_det, rec.eps_next) * (1.0 + 1e-12);
        } else {
            rec.eps_next = std::max(update_epsilon_heuristic(rec.min_det), config.eps_min);
        }
        params.eps = rec.eps_next;
        rec.f_next = total_energy(inner.U, inst, params);
        if (config.eps_rule == EpsRule::theory && rec.descent_certified) {
            rec.non_growth_checked = true;
            rec.non_growth_holds = rec.f_next <= rec.f_before * (1.0 + 1e-12);
        }

        U = std::move(inner.U);
        eps = rec.eps_next;

        if (config.scheme == Scheme::automatic && active == Scheme::quasi_newton) {
            stalls = (!rec.descent_certified && rec.min_det <= 0) ? stalls + 1 : 0;
            if (stalls >= 2) active = Scheme::newton;
        }

        const bool done = rec.min_det > 0 && rec.f_next > (1.0 - config.stagnation) * rec.f_before;
        rec.wall_time_s = seconds_since(iter_start);
        result.trace.records.push_back(rec);
        if (done) break;
    }

    result.state.U = std::move(U);
    result.state.iteration = int(result.trace.records.size());
    result.state.eps = eps;
    result.quality = report(result.state.U, inst);
    result.success = result.quality.min_det > 0;
    result.wall_time_s = seconds_since(start);
    return result;
}

UntangleResult untangle(const MeshPair& mesh, TargetPolicy policy, const SolverConfig& config) {
    const Instance inst = build_instance(mesh, policy);
    return untangle(inst, mesh.initial_map, config);
}

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::quasi_newton: return "quasi_newton";
        case Scheme::newton: return "newton";
        case Scheme::automatic: return "auto";
    }
    return "unknown";
}

std::string to_string(EpsRule rule) { return rule == EpsRule::theory ? "theory" : "heuristic"; }

Scheme parse_scheme(const std::string& name) {
    if (name == "quasi_newton" || name == "quasi-newton" || name == "lbfgs") return Scheme::quasi_newton;
    if (name == "newton") return Scheme::newton;
    if (name == "auto") return Scheme::automatic;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected quasi_newton, newton or auto)");
}

EpsRule parse_eps_rule(const std::string& name) {
    if (name == "theory") return EpsRule::theory;
    if (name == "heuristic") return EpsRule::heuristic;
    throw std::invalid_argument("unknown eps rule '" + name + "' (expected theory or heuristic)");
}

}  // namespace untangle
