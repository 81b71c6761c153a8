#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace metabench {

struct LbfgsOptions {
  int max_iters = 1000;
  double rel_tol = 1e-6;
  int history = 10;
  int max_line_search = 40;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // accepted objective values, x0 first
};

// Deterministic limited-memory BFGS with Armijo backtracking. Only
// improving steps are accepted, so the trace is monotone non-increasing.
// The callable evaluates f(x) and writes the gradient.
LbfgsResult lbfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x0, const LbfgsOptions& opts = {});

}  // namespace metabench
