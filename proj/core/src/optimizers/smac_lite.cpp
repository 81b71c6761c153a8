#include <algorithm>

#include "metabench/optimizers.hpp"
#include "metabench/random_forest.hpp"

namespace metabench {

// Random-forest Bayesian optimization with stochastic local search over EI
// and SMAC's interleaved-random safeguard (every other iteration evaluates a
// uniform point). Simplified relative to full SMAC, hence the name.
Trajectory run_smac_lite(const Objective& objective, int budget,
                         std::uint64_t seed, const SmacConfig& config) {
  RunRecorder rec(objective, Method::smac, budget, seed);
  Rng& rng = rec.rng();
  const int dim = rec.dimension();

  while (!rec.exhausted() && rec.used() < config.n_startup)
    rec.eval(rec.uniform_point());

  RandomForestConfig rf_config{config.num_trees, config.min_leaf};
  long iteration = 0;
  while (!rec.exhausted()) {
    ++iteration;
    if (iteration % 2 == 0) {
      rec.eval(rec.uniform_point());
      continue;
    }

    const auto& xs = rec.history_x_unit();
    const auto& ys = rec.history_y();
    const int n = static_cast<int>(ys.size());
    Eigen::MatrixXd X(n, dim);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      X.row(i) = xs[static_cast<size_t>(i)].transpose();
      y[i] = ys[static_cast<size_t>(i)];
    }
    RandomForest forest;
    forest.fit(X, y, rf_config, rng);
    const double y_best = rec.best_y();

    auto ei_at = [&](const Eigen::VectorXd& x) {
      double mean, var;
      forest.predict(x, mean, var);
      return expected_improvement(mean, std::sqrt(var), y_best);
    };

    // Random candidates, then coordinate hill-climbing from the best few.
    std::vector<std::pair<double, Eigen::VectorXd>> scored;
    scored.reserve(static_cast<size_t>(config.candidates));
    for (int c = 0; c < config.candidates; ++c) {
      Eigen::VectorXd x(dim);
      for (int d = 0; d < dim; ++d) x[d] = rng.u01();
      scored.emplace_back(ei_at(x), std::move(x));
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    Eigen::VectorXd best_x = scored.front().second;
    double best_ei = scored.front().first;
    const int n_starts = std::min<int>(config.hill_climb_starts,
                                       static_cast<int>(scored.size()));
    for (int s = 0; s < n_starts; ++s) {
      Eigen::VectorXd x = scored[static_cast<size_t>(s)].second;
      double ei = scored[static_cast<size_t>(s)].first;
      for (int step = 0; step < config.hill_climb_steps; ++step) {
        Eigen::VectorXd probe = x;
        const int d = static_cast<int>(rng.uniform_int(dim));
        probe[d] = std::min(1.0, std::max(0.0, probe[d] + 0.05 * rng.normal()));
        const double probe_ei = ei_at(probe);
        if (probe_ei > ei) {
          x = probe;
          ei = probe_ei;
        }
      }
      if (ei > best_ei) {
        best_ei = ei;
        best_x = x;
      }
    }
    rec.eval(best_x);
  }
  return rec.take();
}

}  // namespace metabench
