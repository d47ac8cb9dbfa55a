#pragma once

#include <Eigen/Dense>

#include <functional>

namespace cmox {

struct LbfgsOptions {
    int history = 10;
    int max_iter = 1000;
    double tol = 1e-4;            // stop when the gradient infinity-norm reaches this
    double armijo = 1e-4;         // sufficient-decrease constant
    int max_backtracks = 50;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    double grad_inf_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Objective callback: returns f(x) and writes the gradient into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Limited-memory BFGS with backtracking Armijo line search.
/// Throws cmox::Error if the objective becomes non-finite.
LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& opts);

}  // namespace cmox
