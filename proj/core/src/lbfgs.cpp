#include "metabench/lbfgs.hpp"

#include <cmath>
#include <deque>

#include "metabench/common.hpp"

namespace metabench {

LbfgsResult lbfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x0, const LbfgsOptions& opts) {
  const auto n = x0.size();
  LbfgsResult res;
  res.x = x0;

  Eigen::VectorXd g(n), g_new(n), x_new(n), d(n);
  double f = fn(res.x, g);
  if (!std::isfinite(f))
    throw DivergenceError("lbfgs: objective not finite at the initial point", 0);
  res.trace.push_back(f);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    // Two-loop recursion.
    d = -g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      if (std::isfinite(gamma) && gamma > 0) d *= gamma;
    }
    for (size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }
    if (d.dot(g) >= 0) d = -g;  // not a descent direction, reset

    // Armijo backtracking.
    const double slope = d.dot(g);
    double step = 1.0;
    bool accepted = false;
    double f_new = f;
    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      x_new = res.x + step * d;
      f_new = fn(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no improving step along d

    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const double improvement = f - f_new;
    res.x = x_new;
    f = f_new;
    g = g_new;
    res.trace.push_back(f);
    res.iterations = iter + 1;
    if (improvement <= opts.rel_tol * (std::abs(f) + 1e-12)) {
      res.converged = true;
      break;
    }
  }
  res.f = f;
  return res;
}

}  // namespace metabench
