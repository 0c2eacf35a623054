#include "untangle/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

namespace untangle {

namespace {

struct Sample {
    double t = 0;
    double f = 0;
    double dg = 0;   // directional derivative
    Eigen::VectorXd g;
};

// Minimizer of the cubic interpolating (f, f') at both ends, kept inside
// the central 80% of the bracket; bisection when that is not well defined.
double interpolate(const Sample& lo, const Sample& hi) {
    const double a = std::min(lo.t, hi.t), b = std::max(lo.t, hi.t);
    const double margin = 0.1 * (b - a);
    double t = 0.5 * (lo.t + hi.t);
    if (std::isfinite(hi.f) && std::isfinite(hi.dg)) {
        const double d1 = lo.dg + hi.dg - 3.0 * (lo.f - hi.f) / (lo.t - hi.t);
        const double disc = d1 * d1 - lo.dg * hi.dg;
        if (disc >= 0) {
            const double d2 = std::copysign(std::sqrt(disc), hi.t - lo.t);
            const double denom = hi.dg - lo.dg + 2.0 * d2;
            if (denom != 0) {
                const double c = hi.t - (hi.t - lo.t) * (hi.dg + d2 - d1) / denom;
                if (std::isfinite(c)) t = c;
            }
        }
    }
    return std::clamp(t, a + margin, b - margin);
}

class StrongWolfe {
public:
    StrongWolfe(const Objective& obj, const LbfgsOptions& opt, const Eigen::VectorXd& x, const Eigen::VectorXd& dir,
                double f0, double dg0, int& evaluations)
        : obj_(obj), opt_(opt), x_(x), dir_(dir), f0_(f0), dg0_(dg0), evaluations_(evaluations) {}

    std::optional<Sample> search(double t_init) {
        Sample prev{0.0, f0_, dg0_, {}};
        double t = t_init;
        for (int i = 0; i < opt_.max_line_search; ++i) {
            Sample cur = eval(t);
            if (!armijo(cur) || (i > 0 && cur.f >= prev.f)) return zoom(prev, cur);
            if (std::abs(cur.dg) <= -opt_.c2 * dg0_) return cur;
            if (cur.dg >= 0) return zoom(cur, prev);
            prev = std::move(cur);
            t *= 2.0;
        }
        return prev.t > 0 ? std::optional<Sample>(std::move(prev)) : std::nullopt;
    }

private:
    bool armijo(const Sample& s) const { return std::isfinite(s.f) && s.f <= f0_ + opt_.c1 * s.t * dg0_; }

    Sample eval(double t) {
        Sample s;
        s.t = t;
        s.f = obj_(x_ + t * dir_, s.g);
        ++evaluations_;
        s.dg = std::isfinite(s.f) ? s.g.dot(dir_) : std::numeric_limits<double>::quiet_NaN();
        return s;
    }

    std::optional<Sample> zoom(Sample lo, Sample hi) {
        for (int j = 0; j < opt_.max_line_search; ++j) {
            if (std::abs(hi.t - lo.t) <= 1e-14 * std::max(1.0, lo.t)) break;
            Sample cur = eval(interpolate(lo, hi));
            if (!armijo(cur) || cur.f >= lo.f) {
                hi = std::move(cur);
            } else {
                if (std::abs(cur.dg) <= -opt_.c2 * dg0_) return cur;
                if (cur.dg * (hi.t - lo.t) >= 0) hi = lo;
                lo = std::move(cur);
            }
        }
        // lo always satisfies sufficient decrease once it has moved off 0.
        return lo.t > 0 ? std::optional<Sample>(std::move(lo)) : std::nullopt;
    }

    const Objective& obj_;
    const LbfgsOptions& opt_;
    const Eigen::VectorXd& x_;
    const Eigen::VectorXd& dir_;
    double f0_, dg0_;
    int& evaluations_;
};

}  // namespace

LbfgsResult lbfgs(const Objective& objective, Eigen::VectorXd& x, const LbfgsOptions& options) {
    LbfgsResult res;
    if (x.size() == 0) {
        Eigen::VectorXd g;
        res.f = objective(x, g);
        res.evaluations = 1;
        res.converged = true;
        return res;
    }

    Eigen::VectorXd g;
    double f = objective(x, g);
    res.evaluations = 1;

    struct Pair {
        Eigen::VectorXd s, y;
        double rho;
    };
    std::deque<Pair> memory;
    std::vector<double> alpha;

    for (; res.iterations < options.max_iterations; ++res.iterations) {
        if (!std::isfinite(f)) break;
        if (g.lpNorm<Eigen::Infinity>() < options.grad_tol * (1.0 + std::abs(f))) {
            res.converged = true;
            break;
        }

        // Two-loop recursion.
        Eigen::VectorXd dir = -g;
        alpha.assign(memory.size(), 0.0);
        for (std::size_t i = memory.size(); i-- > 0;) {
            alpha[i] = memory[i].rho * memory[i].s.dot(dir);
            dir -= alpha[i] * memory[i].y;
        }
        if (!memory.empty()) {
            const Pair& last = memory.back();
            dir *= last.s.dot(last.y) / last.y.squaredNorm();
        }
        for (std::size_t i = 0; i < memory.size(); ++i) {
            const double beta = memory[i].rho * memory[i].y.dot(dir);
            dir += (alpha[i] - beta) * memory[i].s;
        }

        double dg = g.dot(dir);
        if (!(dg < 0)) {
            memory.clear();
            dir = -g;
            dg = -g.squaredNorm();
        }
        double t0 = memory.empty() ? std::min(1.0, 1.0 / dir.lpNorm<Eigen::Infinity>()) : 1.0;

        std::optional<Sample> step = StrongWolfe(objective, options, x, dir, f, dg, res.evaluations).search(t0);
        if (!step && !memory.empty()) {
            memory.clear();
            dir = -g;
            dg = -g.squaredNorm();
            t0 = std::min(1.0, 1.0 / dir.lpNorm<Eigen::Infinity>());
            step = StrongWolfe(objective, options, x, dir, f, dg, res.evaluations).search(t0);
        }
        if (!step) {
            res.line_search_failed = true;
            break;
        }

        Pair p;
        p.s = step->t * dir;
        p.y = step->g - g;
        const double sy = p.s.dot(p.y);
        x += p.s;
        f = step->f;
        g = std::move(step->g);
        if (sy > std::numeric_limits<double>::epsilon() * p.y.squaredNorm()) {
            p.rho = 1.0 / sy;
            memory.push_back(std::move(p));
            if (int(memory.size()) > options.memory) memory.pop_front();
        }
    }
    res.f = f;
    return res;
}

}  // namespace untangle
