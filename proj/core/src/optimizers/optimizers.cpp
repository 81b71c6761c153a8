#include "metabench/optimizers.hpp"

#include <cmath>

namespace metabench {

double Trajectory::best() const {
  if (incumbent.empty()) throw ValidationError("trajectory is empty");
  return incumbent.back();
}

void Trajectory::add(Config x, double y) {
  xs.push_back(std::move(x));
  ys.push_back(y);
  incumbent.push_back(incumbent.empty() ? y : std::min(incumbent.back(), y));
}

std::string method_tag(Method m) {
  switch (m) {
    case Method::rs: return "rs";
    case Method::de: return "de";
    case Method::cmaes: return "cmaes";
    case Method::tpe: return "tpe";
    case Method::smac: return "smac";
    case Method::gp_bo: return "gp-bo";
    case Method::bnn_bo: return "bnn-bo";
  }
  throw ValidationError("unknown method");
}

Method method_from_tag(const std::string& tag) {
  for (Method m : kAllMethods)
    if (method_tag(m) == tag) return m;
  throw ValidationError("unknown method tag \"" + tag +
                        "\" (expected rs, de, cmaes, tpe, smac, gp-bo, bnn-bo)");
}

int default_budget(Method m) {
  return (m == Method::gp_bo || m == Method::bnn_bo) ? 100 : 200;
}

RunRecorder::RunRecorder(const Objective& objective, Method method, int budget,
                         std::uint64_t seed)
    : objective_(objective),
      dim_(objective.dimension()),
      budget_(budget),
      opt_rng_(splitmix64(seed ^ 0x6f7074ULL)),
      noise_rng_(splitmix64(seed ^ 0x6e6f6973ULL)),
      best_y_(std::numeric_limits<double>::infinity()) {
  if (budget_ < 1) throw ValidationError("optimizer budget must be >= 1");
  traj_.method = method_tag(method);
  traj_.task_id = objective.task_id();
  traj_.seed = seed;
}

double RunRecorder::eval(const Eigen::VectorXd& x_unit) {
  if (exhausted()) throw ValidationError("optimizer exceeded its budget");
  Eigen::VectorXd clipped = x_unit.cwiseMax(0.0).cwiseMin(1.0);
  const Config x = objective_.space().from_unit(clipped);
  const double y = objective_.evaluate(x, noise_rng_);
  traj_.add(x, y);
  xs_unit_.push_back(clipped);
  if (y < best_y_) {
    best_y_ = y;
    best_x_unit_ = clipped;
  }
  return y;
}

Eigen::VectorXd RunRecorder::uniform_point() {
  Eigen::VectorXd x(dim_);
  for (int d = 0; d < dim_; ++d) x[d] = opt_rng_.u01();
  return x;
}

double expected_improvement(double mu, double sigma, double y_best) {
  if (!(sigma > 0.0)) return std::max(y_best - mu, 0.0);
  const double z = (y_best - mu) / sigma;
  return (y_best - mu) * normal_cdf(z) + sigma * normal_pdf(z);
}

Eigen::MatrixXd acquisition_candidates(Rng& rng, const Eigen::VectorXd& incumbent,
                                       int dim, int total, double uniform_frac,
                                       double local_sigma) {
  const int n_uniform = static_cast<int>(std::lround(total * uniform_frac));
  Eigen::MatrixXd cands(total, dim);
  for (int i = 0; i < n_uniform; ++i)
    for (int d = 0; d < dim; ++d) cands(i, d) = rng.u01();
  for (int i = n_uniform; i < total; ++i)
    for (int d = 0; d < dim; ++d) {
      const double v = incumbent[d] + local_sigma * rng.normal();
      cands(i, d) = std::min(1.0, std::max(0.0, v));
    }
  return cands;
}

Trajectory run_optimizer(const Objective& objective, const OptimizerConfig& config) {
  const int budget = config.budget > 0 ? config.budget : default_budget(config.method);
  switch (config.method) {
    case Method::rs: return run_random_search(objective, budget, config.seed);
    case Method::de: return run_de(objective, budget, config.seed);
    case Method::cmaes: return run_cmaes(objective, budget, config.seed);
    case Method::tpe: return run_tpe(objective, budget, config.seed);
    case Method::smac: return run_smac_lite(objective, budget, config.seed);
    case Method::gp_bo: {
      GpBoConfig gc;
      gc.assume_noiseless = config.assume_noiseless;
      return run_gp_bo(objective, budget, config.seed, gc);
    }
    case Method::bnn_bo: {
      BnnBoConfig bc;
      if (config.fast) bc.mcmc_shrink = 10.0;
      return run_bnn_bo(objective, budget, config.seed, bc);
    }
  }
  throw ValidationError("unknown method");
}

}  // namespace metabench
