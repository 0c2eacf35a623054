#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "untangle/energy.hpp"
#include "untangle/lbfgs.hpp"
#include "untangle/mesh.hpp"
#include "untangle/quality.hpp"

namespace untangle {

enum class Scheme {
    quasi_newton,
    newton,
    automatic,   // quasi-Newton, switching to Newton when it stalls on a tangled map
};

enum class EpsRule {
    theory,      // guaranteed update driven by sigma_k and the minimum determinant
    heuristic,   // eps = sqrt(1e-12 + 0.04 min(0, D-)^2)
};

// Golden-section line search for the Newton direction.
struct LineSearchOptions {
    double tau_max = 16.0;
    int golden_iterations = 40;
    double armijo_c1 = 1e-4;
    int max_backtracks = 60;
};

struct SolverConfig {
    Scheme scheme = Scheme::automatic;
    EpsRule eps_rule = EpsRule::heuristic;
    double lambda = 1.0;
    double sigma_floor = 0.1;
    double stagnation = 1e-3;
    int max_outer = 1000;
    double eps_initial = 1.0;
    double eps_min = 1e-12;
    LbfgsOptions lbfgs;
    double cg_rel_tol = 1e-8;
    int cg_max_iterations = 0;   // 0: ten times the number of free DOFs
    LineSearchOptions line_search;
    int threads = 1;

    void validate() const;
};

struct IterationRecord {
    int k = 0;
    Scheme scheme = Scheme::quasi_newton;   // inner minimizer actually used
    double eps = 0;           // eps^k
    double eps_next = 0;      // eps^{k+1}
    double f_before = 0;      // F(U^k, eps^k)
    double f_after = 0;       // F(U^{k+1}, eps^k)
    double f_next = 0;        // F(U^{k+1}, eps^{k+1})
    double min_det = 0;       // D-^{k+1}
    double sigma_raw = 0;     // 1 - f_after / f_before
    double sigma = 0;         // max(sigma_floor, sigma_raw)
    int inner_iterations = 0;
    bool inner_flagged = false;   // L-BFGS line-search failure
    bool cg_fallback = false;     // Newton step fell back to steepest descent
    // sigma_raw >= sigma_floor: the essential descent condition was met.
    bool descent_certified = false;
    // Theory rule only: (1 - sigma) chi(D-, eps^k) <= chi(D-, eps^{k+1}).
    bool suff_cond_checked = false;
    bool suff_cond_holds = false;
    // Theory rule on certified steps: F(U^{k+1}, eps^{k+1}) <= F(U^k, eps^k).
    bool non_growth_checked = false;
    bool non_growth_holds = false;
    double wall_time_s = 0;
};

struct IterationTrace {
    std::vector<IterationRecord> records;
};

struct UntangleResult {
    MapState state;
    IterationTrace trace;
    QualityReport quality;
    bool success = false;   // min det J > 0 at exit
    int inner_iterations = 0;
    double wall_time_s = 0;
};

[[nodiscard]] double min_det(const Eigen::VectorXd& U, const Instance& inst);

[[nodiscard]] double update_epsilon_theory(double eps, double min_det, double sigma);
[[nodiscard]] double update_epsilon_heuristic(double min_det);
[[nodiscard]] double update_epsilon_heuristic(const Eigen::VectorXd& U, const Instance& inst);

[[nodiscard]] double sigma_k(double f_prev, double f_next, double floor = 0.1);

struct InnerResult {
    Eigen::VectorXd U;
    int iterations = 0;
    bool flagged = false;
    bool cg_fallback = false;
    double tau = 0;   // Newton only
    int cg_iterations = 0;
};

// Minimizes F(., eps) over the free DOFs with L-BFGS.
[[nodiscard]] InnerResult quasi_newton_minimize(const Eigen::VectorXd& U, const Instance& inst,
                                                const EnergyParams& params, const LbfgsOptions& options);

// One modified-Newton step: solve H+ dU = grad F by block-Jacobi PCG, then
// U' = U - tau dU with tau from a golden-section line search.
[[nodiscard]] InnerResult newton_step(const Eigen::VectorXd& U, const Instance& inst, const EnergyParams& params,
                                      const SolverConfig& config);

// Line minimization of F(U - tau dir) over tau >= 0. Never increases F;
// returns tau = 0 when no decrease is found.
[[nodiscard]] double line_search(const Eigen::VectorXd& U, const Eigen::VectorXd& dir, double f0, double slope,
                                 const Instance& inst, const EnergyParams& params, const LineSearchOptions& options);

[[nodiscard]] UntangleResult untangle(const Instance& inst, const Eigen::VectorXd& U0, const SolverConfig& config);
[[nodiscard]] UntangleResult untangle(const MeshPair& mesh, TargetPolicy policy, const SolverConfig& config);

[[nodiscard]] std::string to_string(Scheme scheme);
[[nodiscard]] std::string to_string(EpsRule rule);
[[nodiscard]] Scheme parse_scheme(const std::string& name);
[[nodiscard]] EpsRule parse_eps_rule(const std::string& name);

}  // namespace untangle
