#include "cmox/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <string>

#include "cmox/error.hpp"

namespace cmox {

namespace {

double checked(double v, int iter) {
    if (!std::isfinite(v)) {
        throw Error("lbfgs: non-finite objective at iteration " + std::to_string(iter));
    }
    return v;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& opts) {
    struct Pair {
        Eigen::VectorXd s, y;
        double rho;
    };
    std::deque<Pair> memory;

    LbfgsResult res;
    res.x = std::move(x0);
    Eigen::VectorXd grad(res.x.size());
    res.value = checked(f(res.x, grad), 0);
    res.grad_inf_norm = grad.size() ? grad.lpNorm<Eigen::Infinity>() : 0.0;

    Eigen::VectorXd dir(res.x.size()), x_new(res.x.size()), grad_new(res.x.size());
    std::vector<double> alpha;
    while (res.iterations < opts.max_iter) {
        if (res.grad_inf_norm <= opts.tol) {
            res.converged = true;
            return res;
        }
        ++res.iterations;

        // Two-loop recursion.
        dir = -grad;
        alpha.assign(memory.size(), 0.0);
        for (std::size_t i = memory.size(); i-- > 0;) {
            alpha[i] = memory[i].rho * memory[i].s.dot(dir);
            dir.noalias() -= alpha[i] * memory[i].y;
        }
        if (!memory.empty()) {
            const auto& last = memory.back();
            dir *= last.s.dot(last.y) / last.y.squaredNorm();
        }
        for (std::size_t i = 0; i < memory.size(); ++i) {
            const double beta = memory[i].rho * memory[i].y.dot(dir);
            dir.noalias() += (alpha[i] - beta) * memory[i].s;
        }

        double slope = grad.dot(dir);
        if (!(slope < 0.0)) {
            memory.clear();
            dir = -grad;
            slope = -grad.squaredNorm();
        }

        double step = memory.empty() ? std::min(1.0, 1.0 / dir.norm()) : 1.0;
        double value_new = 0.0;
        bool accepted = false;
        for (int k = 0; k < opts.max_backtracks; ++k) {
            x_new = res.x + step * dir;
            value_new = f(x_new, grad_new);
            if (std::isfinite(value_new) && value_new <= res.value + opts.armijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            checked(value_new, res.iterations);
            return res;  // no further progress possible at this precision
        }

        Pair p{x_new - res.x, grad_new - grad, 0.0};
        const double sy = p.s.dot(p.y);
        if (sy > 1e-12 * p.y.squaredNorm()) {
            p.rho = 1.0 / sy;
            memory.push_back(std::move(p));
            if (static_cast<int>(memory.size()) > opts.history) memory.pop_front();
        }
        res.x.swap(x_new);
        grad.swap(grad_new);
        res.value = value_new;
        res.grad_inf_norm = grad.lpNorm<Eigen::Infinity>();
    }
    res.converged = res.grad_inf_norm <= opts.tol;
    return res;
}

}  // namespace cmox
