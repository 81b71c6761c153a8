#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "metabench/tasks.hpp"

namespace metabench {

// ---------------------------------------------------------------------------
// Trajectories

struct Trajectory {
  std::string method;
  std::uint64_t task_id = 0;
  std::uint64_t seed = 0;
  std::vector<Config> xs;          // evaluated configs, native units
  std::vector<double> ys;          // observed values
  std::vector<double> incumbent;   // best observed value after each eval

  int size() const { return static_cast<int>(ys.size()); }
  double best() const;
  void add(Config x, double y);
};

enum class Method { rs, de, cmaes, tpe, smac, gp_bo, bnn_bo };

constexpr std::array<Method, 7> kAllMethods = {
    Method::rs,  Method::de,   Method::cmaes, Method::tpe,
    Method::smac, Method::gp_bo, Method::bnn_bo};

std::string method_tag(Method m);
Method method_from_tag(const std::string& tag);
// 200 evaluations; 100 for the model-heavy gp-bo and bnn-bo.
int default_budget(Method m);

// ---------------------------------------------------------------------------
// Shared run bookkeeping. Optimizers work on the unit cube internally; the
// recorder denormalizes, evaluates (with a noise stream separate from the
// optimizer's own rng), and maintains the trajectory.

class RunRecorder {
 public:
  RunRecorder(const Objective& objective, Method method, int budget,
              std::uint64_t seed);

  Rng& rng() { return opt_rng_; }
  int dimension() const { return dim_; }
  int budget() const { return budget_; }
  int used() const { return traj_.size(); }
  bool exhausted() const { return used() >= budget_; }

  double eval(const Eigen::VectorXd& x_unit);

  double best_y() const { return best_y_; }
  const Eigen::VectorXd& best_x_unit() const { return best_x_unit_; }
  const std::vector<Eigen::VectorXd>& history_x_unit() const { return xs_unit_; }
  const std::vector<double>& history_y() const { return traj_.ys; }

  Eigen::VectorXd uniform_point();

  Trajectory take() { return std::move(traj_); }

 private:
  const Objective& objective_;
  int dim_, budget_;
  Rng opt_rng_, noise_rng_;
  Trajectory traj_;
  std::vector<Eigen::VectorXd> xs_unit_;
  double best_y_;
  Eigen::VectorXd best_x_unit_;
};

// ---------------------------------------------------------------------------
// Acquisition helpers (minimization convention).

// EI = (y_best - mu) Phi(z) + sigma phi(z), z = (y_best - mu) / sigma;
// max(y_best - mu, 0) when sigma == 0.
double expected_improvement(double mu, double sigma, double y_best);

// 70% uniform / 30% Gaussian-around-incumbent candidate set, clipped to the
// unit cube.
Eigen::MatrixXd acquisition_candidates(Rng& rng, const Eigen::VectorXd& incumbent,
                                       int dim, int total = 500,
                                       double uniform_frac = 0.7,
                                       double local_sigma = 0.1);

// ---------------------------------------------------------------------------
// Method configurations (ledgered defaults)

struct DeConfig {
  int pop_size = 10;
  double weight = 0.5;     // F
  double crossover = 0.5;  // CR
};

struct CmaesConfig {
  double sigma0 = 0.6;
  int max_resample = 100;  // boundary handling: resample then clip
};

struct TpeConfig {
  int n_startup = 20;
  double gamma = 0.25;
  int n_candidates = 24;
};

struct SmacConfig {
  int num_trees = 10;
  int min_leaf = 3;
  int n_startup = 2;
  int candidates = 500;
  int hill_climb_starts = 10;
  int hill_climb_steps = 20;
};

struct GpBoConfig {
  int n_startup = 2;
  int hyper_samples = 20;
  int hyper_burn_in = 200;
  int hyper_thin = 5;
  int candidates = 500;
  double uniform_frac = 0.7;
  double local_sigma = 0.1;
  bool assume_noiseless = true;  // noise floor instead of a free noise hyper
};

struct BnnBoConfig {
  std::vector<int> hidden = {50, 50, 50};
  double step = 1e-2;
  int burn_in_factor = 100;  // burn-in = factor * #observations
  int num_samples = 100;
  long sample_steps = 10000;
  int n_startup = 2;
  int minibatch = 32;
  double mcmc_shrink = 1.0;  // --fast sets 10
  int candidates = 500;
  double uniform_frac = 0.7;
  double local_sigma = 0.1;
};

// ---------------------------------------------------------------------------
// The seven methods. Every method consumes its own rng derived from `seed`
// and evaluates a shared uniform startup point first.

Trajectory run_random_search(const Objective& objective, int budget,
                             std::uint64_t seed);
Trajectory run_de(const Objective& objective, int budget, std::uint64_t seed,
                  const DeConfig& config = {});
Trajectory run_cmaes(const Objective& objective, int budget, std::uint64_t seed,
                     const CmaesConfig& config = {});
Trajectory run_tpe(const Objective& objective, int budget, std::uint64_t seed,
                   const TpeConfig& config = {});
Trajectory run_smac_lite(const Objective& objective, int budget,
                         std::uint64_t seed, const SmacConfig& config = {});
Trajectory run_gp_bo(const Objective& objective, int budget, std::uint64_t seed,
                     const GpBoConfig& config = {});
Trajectory run_bnn_bo(const Objective& objective, int budget, std::uint64_t seed,
                      const BnnBoConfig& config = {});

// DE rand/1 mutation: x1 + F (x2 - x3), no bound handling.
Eigen::VectorXd de_mutate(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                          const Eigen::VectorXd& x3, double weight);

// CMA-ES population size 4 + floor(3 ln D).
int cmaes_lambda(int dim);

// TPE good-set size: ceil(gamma * n).
int tpe_good_count(double gamma, int n_observations);

struct OptimizerConfig {
  Method method = Method::rs;
  int budget = 0;  // <= 0: default_budget(method)
  std::uint64_t seed = 0;
  bool fast = false;             // shrink BNN-BO MCMC budget 10x
  bool assume_noiseless = true;  // GP-BO noise handling
};

Trajectory run_optimizer(const Objective& objective, const OptimizerConfig& config);

}  // namespace metabench
