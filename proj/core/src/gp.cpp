#include "metabench/gp.hpp"

#include <cmath>

#include "metabench/kernels.hpp"

namespace metabench {

namespace {

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const GpHypers& h) {
  const auto n = X.rows();
  const Eigen::ArrayXd inv_ls = (-h.log_ls).array().exp();
  const double sv = std::exp(h.log_sv);
  const Eigen::MatrixXd Xs = X.array().rowwise() * inv_ls.transpose();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = sv;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double r2 = (Xs.row(i) - Xs.row(j)).squaredNorm();
      K(i, j) = K(j, i) = matern52_r2(r2, sv);
    }
  }
  return K;
}

Eigen::LLT<Eigen::MatrixXd> chol_ladder(Eigen::MatrixXd K, const char* what) {
  const double scale = K.diagonal().mean();
  for (double jitter : {0.0, 1e-10, 1e-8, 1e-6, 1e-4}) {
    Eigen::MatrixXd J = K;
    if (jitter > 0) J.diagonal().array() += jitter * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(J);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw Error(std::string(what) + ": Cholesky failed after jitter ladder");
}

}  // namespace

void GpRegressor::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const GpHypers& hypers) {
  if (X.rows() != y.size() || X.rows() < 1)
    throw ValidationError("gp: bad training shapes");
  X_ = X;
  hypers_ = hypers;
  Eigen::MatrixXd K = kernel_matrix(X, hypers);
  K.diagonal().array() += std::exp(hypers.log_noise);
  llt_ = chol_ladder(std::move(K), "gp fit");
  alpha_ = llt_.solve(y);
  const double logdet =
      2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
  log_marginal_ = -0.5 * y.dot(alpha_) - 0.5 * logdet -
                  0.5 * static_cast<double>(y.size()) * std::log(2.0 * M_PI);
}

void GpRegressor::predict(const Eigen::VectorXd& x, double& mean,
                          double& var) const {
  const auto n = X_.rows();
  const Eigen::ArrayXd inv_ls = (-hypers_.log_ls).array().exp();
  const double sv = std::exp(hypers_.log_sv);
  Eigen::VectorXd k_star(n);
  const Eigen::ArrayXd xs = x.array() * inv_ls;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r2 = (X_.row(i).transpose().array() * inv_ls - xs).matrix().squaredNorm();
    k_star[i] = matern52_r2(r2, sv);
  }
  mean = k_star.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(k_star);
  var = std::max(sv - v.squaredNorm(), 0.0);
}

double GpRegressor::log_marginal_likelihood(const Eigen::MatrixXd& X,
                                            const Eigen::VectorXd& y,
                                            const GpHypers& hypers) {
  Eigen::MatrixXd K = kernel_matrix(X, hypers);
  K.diagonal().array() += std::exp(hypers.log_noise);
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd alpha = llt.solve(y);
  const double logdet =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * y.dot(alpha) - 0.5 * logdet -
         0.5 * static_cast<double>(y.size()) * std::log(2.0 * M_PI);
}

std::vector<GpHypers> sample_gp_hypers(const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y, int n_samples,
                                       int burn_in, int thin, Rng& rng,
                                       double fix_noise) {
  const int dim = static_cast<int>(X.cols());
  const bool noise_free = fix_noise >= 0.0;
  const int n_hyp = dim + 1 + (noise_free ? 0 : 1);

  // Log-normal priors, unit scale: lengthscales around 0.5 (unit cube),
  // signal variance around 1, noise around 1e-2.
  Eigen::VectorXd prior_mean(n_hyp);
  for (int d = 0; d < dim; ++d) prior_mean[d] = std::log(0.5);
  prior_mean[dim] = 0.0;
  if (!noise_free) prior_mean[dim + 1] = std::log(1e-2);

  auto unpack = [&](const Eigen::VectorXd& v) {
    GpHypers h;
    h.log_ls = v.head(dim);
    h.log_sv = v[dim];
    h.log_noise = noise_free ? std::log(fix_noise) : v[dim + 1];
    return h;
  };
  auto log_target = [&](const Eigen::VectorXd& v) {
    const double lml = GpRegressor::log_marginal_likelihood(X, y, unpack(v));
    return lml - 0.5 * (v - prior_mean).squaredNorm();
  };

  Eigen::VectorXd cur = prior_mean;
  double cur_lp = log_target(cur);
  double step = 0.25;
  std::vector<GpHypers> samples;
  samples.reserve(static_cast<size_t>(n_samples));

  const int total = burn_in + n_samples * thin;
  for (int it = 0; it < total; ++it) {
    Eigen::VectorXd prop(n_hyp);
    for (int i = 0; i < n_hyp; ++i) prop[i] = cur[i] + step * rng.normal();
    const double prop_lp = log_target(prop);
    const bool accept = std::log(rng.u01_open()) < prop_lp - cur_lp;
    if (accept) {
      cur = prop;
      cur_lp = prop_lp;
    }
    if (it < burn_in) {
      // crude Robbins-Monro adaptation toward ~25% acceptance
      step *= accept ? 1.02 : 0.99;
      step = std::min(std::max(step, 1e-3), 2.0);
    } else if ((it - burn_in + 1) % thin == 0 &&
               static_cast<int>(samples.size()) < n_samples) {
      samples.push_back(unpack(cur));
    }
  }
  return samples;
}

}  // namespace metabench
