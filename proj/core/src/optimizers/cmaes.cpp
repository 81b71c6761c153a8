#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>

#include "metabench/optimizers.hpp"

namespace metabench {

int cmaes_lambda(int dim) {
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dim))));
}

// Standard (mu/mu_w, lambda)-CMA-ES with rank-one and rank-mu covariance
// updates and cumulative step-size control. Candidates violating the box are
// resampled up to max_resample times, then clipped.
Trajectory run_cmaes(const Objective& objective, int budget, std::uint64_t seed,
                     const CmaesConfig& config) {
  const int dim = objective.dimension();
  if (dim < 2)
    throw UnsupportedDimensionError(
        "cmaes: 1-dimensional problems are not supported");
  RunRecorder rec(objective, Method::cmaes, budget, seed);
  Rng& rng = rec.rng();

  // Startup evaluation shared by all methods.
  if (!rec.exhausted()) rec.eval(rec.uniform_point());

  const int lambda = cmaes_lambda(dim);
  const int mu = lambda / 2;
  Eigen::VectorXd weights(mu);
  for (int i = 0; i < mu; ++i)
    weights[i] = std::log((lambda + 1) / 2.0) - std::log(i + 1.0);
  weights /= weights.sum();
  const double mu_eff = 1.0 / weights.squaredNorm();

  const double c_sigma = (mu_eff + 2.0) / (dim + mu_eff + 5.0);
  const double d_sigma =
      1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (dim + 1.0)) - 1.0) +
      c_sigma;
  const double c_c = (4.0 + mu_eff / dim) / (dim + 4.0 + 2.0 * mu_eff / dim);
  const double c_1 = 2.0 / (std::pow(dim + 1.3, 2) + mu_eff);
  const double c_mu = std::min(
      1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) /
                     (std::pow(dim + 2.0, 2) + mu_eff));
  const double chi_n =
      std::sqrt(static_cast<double>(dim)) *
      (1.0 - 1.0 / (4.0 * dim) + 1.0 / (21.0 * dim * dim));

  Eigen::VectorXd mean = Eigen::VectorXd::Constant(dim, 0.5);
  double sigma = config.sigma0;
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd p_sigma = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd p_c = Eigen::VectorXd::Zero(dim);
  long gen = 0;

  std::vector<Eigen::VectorXd> ys(static_cast<size_t>(lambda));
  std::vector<Eigen::VectorXd> xs(static_cast<size_t>(lambda));
  std::vector<double> fs(static_cast<size_t>(lambda));

  while (!rec.exhausted()) {
    ++gen;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    Eigen::VectorXd evals = es.eigenvalues().cwiseMax(1e-20);
    const Eigen::MatrixXd& B = es.eigenvectors();
    const Eigen::VectorXd D_sqrt = evals.cwiseSqrt();
    Eigen::MatrixXd BD = B * D_sqrt.asDiagonal();
    Eigen::MatrixXd C_inv_sqrt =
        B * D_sqrt.cwiseInverse().asDiagonal() * B.transpose();

    const int evals_this_gen = std::min(lambda, rec.budget() - rec.used());
    for (int k = 0; k < evals_this_gen; ++k) {
      Eigen::VectorXd z(dim), x(dim);
      bool in_bounds = false;
      for (int attempt = 0; attempt < config.max_resample && !in_bounds; ++attempt) {
        for (int d = 0; d < dim; ++d) z[d] = rng.normal();
        x = mean + sigma * (BD * z);
        in_bounds = (x.array() >= 0.0).all() && (x.array() <= 1.0).all();
      }
      if (!in_bounds) x = x.cwiseMax(0.0).cwiseMin(1.0);
      ys[static_cast<size_t>(k)] = (x - mean) / sigma;
      xs[static_cast<size_t>(k)] = x;
      fs[static_cast<size_t>(k)] = rec.eval(x);
    }
    if (evals_this_gen < lambda) break;  // budget exhausted mid-generation

    std::vector<int> idx(static_cast<size_t>(lambda));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return fs[static_cast<size_t>(a)] < fs[static_cast<size_t>(b)]; });

    Eigen::VectorXd y_w = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < mu; ++i)
      y_w += weights[i] * ys[static_cast<size_t>(idx[static_cast<size_t>(i)])];
    mean += sigma * y_w;

    p_sigma = (1.0 - c_sigma) * p_sigma +
              std::sqrt(c_sigma * (2.0 - c_sigma) * mu_eff) * (C_inv_sqrt * y_w);
    const double ps_norm = p_sigma.norm();
    const bool h_sigma =
        ps_norm / std::sqrt(1.0 - std::pow(1.0 - c_sigma, 2.0 * gen)) <
        (1.4 + 2.0 / (dim + 1.0)) * chi_n;
    p_c = (1.0 - c_c) * p_c;
    if (h_sigma) p_c += std::sqrt(c_c * (2.0 - c_c) * mu_eff) * y_w;

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < mu; ++i) {
      const auto& y = ys[static_cast<size_t>(idx[static_cast<size_t>(i)])];
      rank_mu += weights[i] * (y * y.transpose());
    }
    const double delta_h = h_sigma ? 0.0 : c_c * (2.0 - c_c);
    C = (1.0 - c_1 - c_mu) * C +
        c_1 * (p_c * p_c.transpose() + delta_h * C) + c_mu * rank_mu;

    sigma *= std::exp((c_sigma / d_sigma) * (ps_norm / chi_n - 1.0));
    sigma = std::min(sigma, 1e4);
  }
  return rec.take();
}

}  // namespace metabench
