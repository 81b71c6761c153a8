#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <vector>

#include "metabench/common.hpp"

namespace metabench {

// Hyperparameters of a zero-mean Matérn-5/2 ARD GP with Gaussian noise,
// in log space.
struct GpHypers {
  Eigen::VectorXd log_ls;  // per-dimension lengthscales
  double log_sv = 0.0;     // signal variance
  double log_noise = 0.0;  // noise variance
};

// Dense GP regression. fit() factorizes once; predict() returns the latent
// mean and variance (noise not added).
class GpRegressor {
 public:
  void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
           const GpHypers& hypers);
  void predict(const Eigen::VectorXd& x, double& mean, double& var) const;
  double log_marginal() const { return log_marginal_; }

  // Standalone evaluation used by the hyperparameter sampler.
  static double log_marginal_likelihood(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y,
                                        const GpHypers& hypers);

 private:
  Eigen::MatrixXd X_;
  GpHypers hypers_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double log_marginal_ = 0.0;
};

// Adaptive random-walk Metropolis over log-hyperparameters with log-normal
// priors. When fix_noise >= 0 the noise variance is held at that value and
// only (lengthscales, signal var) are sampled.
std::vector<GpHypers> sample_gp_hypers(const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y, int n_samples,
                                       int burn_in, int thin, Rng& rng,
                                       double fix_noise = -1.0);

}  // namespace metabench
