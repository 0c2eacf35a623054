#pragma once

#include <functional>

#include <Eigen/Core>

namespace untangle {

struct LbfgsOptions {
    int memory = 10;
    int max_iterations = 500;
    // Stop when |grad|_inf < grad_tol * (1 + |f|).
    double grad_tol = 1e-10;
    // Strong Wolfe constants.
    double c1 = 1e-4;
    double c2 = 0.9;
    int max_line_search = 40;
};

struct LbfgsResult {
    double f = 0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    bool line_search_failed = false;
};

// Returns f(x) and writes the gradient.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// Limited-memory BFGS with a strong Wolfe line search. x is updated in
// place and f(x) never increases; on a line-search failure the best point
// found so far is kept and the failure is flagged.
LbfgsResult lbfgs(const Objective& objective, Eigen::VectorXd& x, const LbfgsOptions& options = {});

}  // namespace untangle
