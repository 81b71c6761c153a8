#include "metabench/optimizers.hpp"

namespace metabench {

Trajectory run_random_search(const Objective& objective, int budget,
                             std::uint64_t seed) {
  RunRecorder rec(objective, Method::rs, budget, seed);
  while (!rec.exhausted()) rec.eval(rec.uniform_point());
  return rec.take();
}

}  // namespace metabench
