#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "metabench/common.hpp"
#include "metabench/gauss_hermite.hpp"

namespace metabench {

struct LatentSpaceConfig {
  int latent_dim = 5;      // Q
  int inducing_count = 0;  // 0 -> min(T, 32)
  int gh_degree = 0;       // 0 -> auto by latent_dim
  int max_iters = 1000;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
};

// Gaussian variational posterior q(h_t) = N(mean, diag(var)).
struct TaskPosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

struct EncoderModel {
  LatentSpaceConfig config;
  std::vector<TaskPosterior> posteriors;       // one per task
  Eigen::VectorXd lengthscales;                // ARD, length Q
  double signal_var = 1.0;
  double noise_var = 0.1;
  Eigen::MatrixXd inducing;                    // m x Q
  double bound = 0.0;                          // final variational lower bound
  bool lengthscale_clamped = false;
  std::vector<double> bound_trace;

  int latent_dim() const { return static_cast<int>(lengthscales.size()); }
  int num_tasks() const { return static_cast<int>(posteriors.size()); }
};

// The sparse variational bound over a fixed dataset. Parameters are packed
// into one flat vector:
//   [means (T*Q)] [log vars (T*Q)] [Z (m*Q)] [log lengthscales (Q)]
//   [log signal var] [log noise var]
// Expectations of the Matérn-5/2 kernel under q(h) are evaluated with a
// tensor-product Gauss-Hermite rule, so the bound and its gradient are
// deterministic and differentiate each other exactly.
class GplvmBound {
 public:
  GplvmBound(const Eigen::MatrixXd& standardized_targets, int latent_dim,
             int inducing_count, int gh_degree);

  int num_tasks() const { return T_; }
  int latent_dim() const { return Q_; }
  int inducing_count() const { return m_; }
  int num_params() const;

  Eigen::VectorXd pack(const Eigen::MatrixXd& means, const Eigen::MatrixXd& log_vars,
                       const Eigen::MatrixXd& inducing, const Eigen::VectorXd& log_ls,
                       double log_sv, double log_noise) const;

  // Returns the bound value (to be maximized) and writes its gradient.
  // Lengthscales below 1e-6 are clamped and flagged via was_clamped().
  double value_and_grad(const Eigen::VectorXd& params, Eigen::VectorXd& grad) const;
  double value(const Eigen::VectorXd& params) const;

  bool was_clamped() const { return clamped_; }

  // Views into a packed vector.
  Eigen::MatrixXd means_of(const Eigen::VectorXd& params) const;
  Eigen::MatrixXd vars_of(const Eigen::VectorXd& params) const;
  Eigen::MatrixXd inducing_of(const Eigen::VectorXd& params) const;
  Eigen::VectorXd lengthscales_of(const Eigen::VectorXd& params) const;
  double signal_var_of(const Eigen::VectorXd& params) const;
  double noise_var_of(const Eigen::VectorXd& params) const;

 private:
  Eigen::MatrixXd Y_;
  int T_, N_, Q_, m_;
  TensorGrid quad_;
  mutable bool clamped_ = false;
};

int auto_gh_degree(int latent_dim);

// Trains the encoder on the standardized T x N target matrix by maximizing
// the variational bound with L-BFGS (PCA initialization). Deterministic
// given the seed. Throws DivergenceError when the bound turns non-finite.
EncoderModel train_encoder(const Eigen::MatrixXd& standardized_targets,
                           const LatentSpaceConfig& config);

// Draw from N(mean, diag(var)).
Eigen::VectorXd sample_latent(const TaskPosterior& posterior, Rng& rng);

}  // namespace metabench
