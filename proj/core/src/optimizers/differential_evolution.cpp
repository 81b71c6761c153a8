#include "metabench/optimizers.hpp"

namespace metabench {

Eigen::VectorXd de_mutate(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                          const Eigen::VectorXd& x3, double weight) {
  return x1 + weight * (x2 - x3);
}

// rand/1/bin with greedy selection; out-of-bounds coordinates are clipped.
Trajectory run_de(const Objective& objective, int budget, std::uint64_t seed,
                  const DeConfig& config) {
  if (budget < config.pop_size)
    throw ValidationError("de: budget must be >= population size");
  RunRecorder rec(objective, Method::de, budget, seed);
  Rng& rng = rec.rng();
  const int dim = rec.dimension();
  const int np = config.pop_size;

  std::vector<Eigen::VectorXd> pop;
  std::vector<double> fitness;
  for (int i = 0; i < np && !rec.exhausted(); ++i) {
    pop.push_back(rec.uniform_point());
    fitness.push_back(rec.eval(pop.back()));
  }

  while (!rec.exhausted()) {
    for (int i = 0; i < np && !rec.exhausted(); ++i) {
      int r1, r2, r3;
      do { r1 = static_cast<int>(rng.uniform_int(np)); } while (r1 == i);
      do { r2 = static_cast<int>(rng.uniform_int(np)); } while (r2 == i || r2 == r1);
      do { r3 = static_cast<int>(rng.uniform_int(np)); } while (r3 == i || r3 == r1 || r3 == r2);

      const Eigen::VectorXd v = de_mutate(pop[r1], pop[r2], pop[r3], config.weight);
      Eigen::VectorXd trial = pop[i];
      const int forced = static_cast<int>(rng.uniform_int(dim));
      for (int d = 0; d < dim; ++d) {
        if (d == forced || rng.u01() < config.crossover) trial[d] = v[d];
      }
      trial = trial.cwiseMax(0.0).cwiseMin(1.0);

      const double y = rec.eval(trial);
      if (y <= fitness[i]) {
        pop[i] = trial;
        fitness[i] = y;
      }
    }
  }
  return rec.take();
}

}  // namespace metabench
