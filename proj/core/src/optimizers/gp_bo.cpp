#include <cmath>

#include "metabench/gp.hpp"
#include "metabench/optimizers.hpp"

namespace metabench {

// BO with a zero-mean Matérn-5/2 GP. Expected improvement is marginalized
// over hyperparameter posterior samples (adaptive random-walk Metropolis);
// the acquisition is optimized over 70% uniform / 30% local candidates.
Trajectory run_gp_bo(const Objective& objective, int budget, std::uint64_t seed,
                     const GpBoConfig& config) {
  RunRecorder rec(objective, Method::gp_bo, budget, seed);
  Rng& rng = rec.rng();
  const int dim = rec.dimension();

  while (!rec.exhausted() && rec.used() < config.n_startup)
    rec.eval(rec.uniform_point());

  while (!rec.exhausted()) {
    const auto& xs = rec.history_x_unit();
    const auto& ys = rec.history_y();
    const int n = static_cast<int>(ys.size());
    Eigen::MatrixXd X(n, dim);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      X.row(i) = xs[static_cast<size_t>(i)].transpose();
      y[i] = ys[static_cast<size_t>(i)];
    }
    // Standardize observations for the zero-mean GP.
    const double y_mean = y.mean();
    double y_sd = std::sqrt((y.array() - y_mean).square().sum() / n);
    if (!(y_sd > 1e-12)) y_sd = 1.0;
    const Eigen::VectorXd ys_std = (y.array() - y_mean) / y_sd;

    const double fix_noise = config.assume_noiseless ? 1e-6 : -1.0;
    const auto hyper_samples =
        sample_gp_hypers(X, ys_std, config.hyper_samples, config.hyper_burn_in,
                         config.hyper_thin, rng, fix_noise);

    std::vector<GpRegressor> gps(hyper_samples.size());
    for (size_t s = 0; s < hyper_samples.size(); ++s)
      gps[s].fit(X, ys_std, hyper_samples[s]);

    const double y_best_std = (rec.best_y() - y_mean) / y_sd;
    const Eigen::MatrixXd cands =
        acquisition_candidates(rng, rec.best_x_unit(), dim, config.candidates,
                               config.uniform_frac, config.local_sigma);

    int best_idx = 0;
    double best_acq = -1.0;
    for (int c = 0; c < cands.rows(); ++c) {
      double acq = 0.0;
      for (const auto& gp : gps) {
        double mu, var;
        gp.predict(cands.row(c).transpose(), mu, var);
        acq += expected_improvement(mu, std::sqrt(var), y_best_std);
      }
      acq /= static_cast<double>(gps.size());
      if (acq > best_acq) {
        best_acq = acq;
        best_idx = c;
      }
    }
    rec.eval(cands.row(best_idx).transpose());
  }
  return rec.take();
}

}  // namespace metabench
