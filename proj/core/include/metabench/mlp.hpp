#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "metabench/common.hpp"

namespace metabench {

// Fully connected tanh net with a scalar mean head plus one free parameter
// rho; the homoscedastic noise variance is softplus(rho), independent of the
// input. Flat parameter layout:
//   [W1 (h1 x in)] [b1] [W2 (h2 x h1)] [b2] ... [w_out (h_last)] [b_out] [rho]
// with matrices stored column-major.
struct NetArchitecture {
  int input_dim = 1;
  std::vector<int> hidden = {500, 500, 500};

  int num_params() const;
  bool operator==(const NetArchitecture& o) const {
    return input_dim == o.input_dim && hidden == o.hidden;
  }
};

inline double softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Numerically exact-enough tanh with vectorizable math. The two-branch form
// avoids the cancellation of 1 - 2/(e^{2x}+1) near zero.
template <typename Derived>
auto fast_tanh(const Eigen::ArrayBase<Derived>& x) {
  using T = typename Derived::Scalar;
  auto small = x * (T(1) - x * x * (T(1.0 / 3.0) - x * x * T(2.0 / 15.0)));
  auto big = T(1) - T(2) / ((x * T(2)).exp() + T(1));
  return (x.abs() < T(1e-3)).select(small, big);
}

// Single-input forward pass; returns the mean head.
double mlp_forward_mu(const NetArchitecture& arch, const double* theta,
                      const Eigen::VectorXd& input);
// (mu, sigma^2 = softplus(rho)).
std::pair<double, double> mlp_forward(const NetArchitecture& arch,
                                      const double* theta,
                                      const Eigen::VectorXd& input);

// Batched forward: rows of X are inputs, returns the mean head per row.
Eigen::VectorXd mlp_forward_batch(const NetArchitecture& arch,
                                  const double* theta,
                                  const Eigen::MatrixXd& X);

// ---------------------------------------------------------------------------
// Batched forward/backward workspace used by the samplers. Templated so the
// inner Bayesian-optimization nets can run in float32.
template <typename T>
class MlpWorkspace {
 public:
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  explicit MlpWorkspace(const NetArchitecture& arch) : arch_(arch) {
    offsets_.clear();
    int at = 0, in = arch.input_dim;
    for (int h : arch.hidden) {
      offsets_.push_back(at);          // W
      at += h * in;
      offsets_.push_back(at);          // b
      at += h;
      in = h;
    }
    offsets_.push_back(at);            // w_out
    at += in;
    offsets_.push_back(at);            // b_out
    at += 1;
    rho_offset_ = at;
    ++at;
    total_ = at;
  }

  int num_params() const { return total_; }
  int rho_offset() const { return rho_offset_; }

  // mu per row of X; activations are retained for backward().
  void forward(const Vec& theta, const Mat& X, Vec& mu) {
    const int L = static_cast<int>(arch_.hidden.size());
    acts_.resize(static_cast<size_t>(L));
    const auto R = X.rows();
    int in = arch_.input_dim;
    const Mat* cur = &X;
    for (int l = 0; l < L; ++l) {
      const int h = arch_.hidden[static_cast<size_t>(l)];
      Eigen::Map<const Mat> W(theta.data() + offsets_[2 * l], h, in);
      Eigen::Map<const Vec> b(theta.data() + offsets_[2 * l + 1], h);
      Mat& A = acts_[static_cast<size_t>(l)];
      A.resize(R, h);
      A.noalias() = *cur * W.transpose();
      A.array().rowwise() += b.transpose().array();
      A.array() = fast_tanh(A.array());
      cur = &A;
      in = h;
    }
    Eigen::Map<const Vec> w_out(theta.data() + offsets_[2 * L], in);
    const T b_out = theta[offsets_[2 * L + 1]];
    mu.resize(R);
    mu.noalias() = *cur * w_out;
    mu.array() += b_out;
  }

  // Accumulates d(objective)/d(theta) given dmu = d(objective)/d(mu) per row.
  // forward() must have been called with the same theta and X.
  void backward(const Vec& theta, const Mat& X, const Vec& dmu, Vec& grad) {
    const int L = static_cast<int>(arch_.hidden.size());
    const Mat& last = acts_[static_cast<size_t>(L - 1)];
    const int h_last = arch_.hidden[static_cast<size_t>(L - 1)];
    Eigen::Map<const Vec> w_out(theta.data() + offsets_[2 * L], h_last);

    Eigen::Map<Vec>(grad.data() + offsets_[2 * L], h_last).noalias() +=
        last.transpose() * dmu;
    grad[offsets_[2 * L + 1]] += dmu.sum();

    // delta through the output head.
    delta_.noalias() = dmu * w_out.transpose();
    for (int l = L - 1; l >= 0; --l) {
      const Mat& A = acts_[static_cast<size_t>(l)];
      delta_.array() *= (T(1) - A.array().square());
      const int h = arch_.hidden[static_cast<size_t>(l)];
      const int in = l == 0 ? arch_.input_dim : arch_.hidden[static_cast<size_t>(l - 1)];
      const Mat& below = l == 0 ? X : acts_[static_cast<size_t>(l - 1)];
      Eigen::Map<Mat>(grad.data() + offsets_[2 * l], h, in).noalias() +=
          delta_.transpose() * below;
      Eigen::Map<Vec>(grad.data() + offsets_[2 * l + 1], h).noalias() +=
          delta_.colwise().sum().transpose();
      if (l > 0) {
        Eigen::Map<const Mat> W(theta.data() + offsets_[2 * l], h, in);
        next_delta_.noalias() = delta_ * W;
        delta_.swap(next_delta_);
      }
    }
  }

 private:
  NetArchitecture arch_;
  std::vector<int> offsets_;
  int rho_offset_ = 0, total_ = 0;
  std::vector<Mat> acts_;
  Mat delta_, next_delta_;
};

// ---------------------------------------------------------------------------
// Full-data log posterior of the multi-task net (float64). Rows of X carry
// the concatenated (x_norm, h) inputs after expansion over latent draws.

struct BnnData {
  Eigen::MatrixXd X;              // rows: datapoints, cols: D (inputs only)
  Eigen::VectorXd y;              // standardized targets
  std::vector<int> task_of_row;   // task index per row
  std::vector<Eigen::MatrixXd> latent_draws;  // per task: H x Q
};

struct LogPosteriorParts {
  double log_likelihood = 0.0;  // sum over datapoints of the H-averaged term
  double log_prior = 0.0;
  double total() const { return log_likelihood + log_prior; }
};

// Value and gradient of the log posterior (likelihood averaged over the H
// latent draws per datapoint, Gaussian prior over all parameters including
// rho). grad must be sized num_params; it is overwritten.
LogPosteriorParts log_posterior_and_grad(const NetArchitecture& arch,
                                         const Eigen::VectorXd& theta,
                                         const BnnData& data, double prior_var,
                                         Eigen::VectorXd& grad);

}  // namespace metabench
