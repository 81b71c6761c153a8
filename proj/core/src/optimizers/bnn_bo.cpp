#include <algorithm>
#include <cmath>
#include <numeric>

#include "metabench/mlp.hpp"
#include "metabench/optimizers.hpp"
#include "metabench/sghmc.hpp"

namespace metabench {

// BO with a small Bayesian neural network (3x50 tanh, distinct from the
// meta-model's 3x500) refit by SGHMC at every iteration: burn-in grows with
// the number of observations, then num_samples weight vectors are kept over
// sample_steps steps. The acquisition layer matches gp_bo. The inner net
// runs in float32; the chain is deterministic per seed either way.
Trajectory run_bnn_bo(const Objective& objective, int budget, std::uint64_t seed,
                      const BnnBoConfig& config) {
  using VecF = Eigen::Matrix<float, Eigen::Dynamic, 1>;
  using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic>;

  RunRecorder rec(objective, Method::bnn_bo, budget, seed);
  Rng& rng = rec.rng();
  const int dim = rec.dimension();

  while (!rec.exhausted() && rec.used() < config.n_startup)
    rec.eval(rec.uniform_point());

  NetArchitecture arch;
  arch.input_dim = dim;
  arch.hidden = config.hidden;
  const int P = arch.num_params();
  MlpWorkspace<float> ws(arch);

  const double shrink = std::max(config.mcmc_shrink, 1.0);
  const long sample_steps =
      std::max<long>(config.num_samples,
                     static_cast<long>(config.sample_steps / shrink));
  const long keep_every = std::max<long>(1, sample_steps / config.num_samples);

  while (!rec.exhausted()) {
    const auto& xs = rec.history_x_unit();
    const auto& ys = rec.history_y();
    const int n = static_cast<int>(ys.size());

    MatF X(n, dim);
    VecF y(n);
    for (int i = 0; i < n; ++i) {
      X.row(i) = xs[static_cast<size_t>(i)].cast<float>().transpose();
      y[i] = static_cast<float>(ys[static_cast<size_t>(i)]);
    }
    const float y_mean = y.mean();
    float y_sd = std::sqrt((y.array() - y_mean).square().sum() / n);
    if (!(y_sd > 1e-6f)) y_sd = 1.0f;
    y = (y.array() - y_mean) / y_sd;

    SghmcConfig scfg;
    scfg.step = config.step;
    scfg.burn_in = static_cast<long>(config.burn_in_factor * n / shrink);
    scfg.num_samples = config.num_samples;
    scfg.keep_every = keep_every;
    scfg.friction = 0.01;
    scfg.prior_var = 1.0;
    scfg.grad_scale = static_cast<double>(n);

    const int B = std::min(config.minibatch, n);
    const long steps_per_epoch = (n + B - 1) / B;
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    long epoch_of_last = -1;

    MatF Xbatch(B, dim);
    VecF mu, dmu(B);
    const float scale = static_cast<float>(n) / static_cast<float>(B);

    auto grad_fn = [&](const VecF& theta, VecF& grad, long step) {
      const long epoch = step / steps_per_epoch;
      if (epoch != epoch_of_last) {
        for (int i = n - 1; i > 0; --i)
          std::swap(order[static_cast<size_t>(i)],
                    order[static_cast<size_t>(rng.uniform_int(
                        static_cast<std::uint64_t>(i + 1)))]);
        epoch_of_last = epoch;
      }
      const long pos = (step % steps_per_epoch) * B;
      const long bsz = std::min<long>(B, n - pos);
      for (long k = 0; k < bsz; ++k)
        Xbatch.row(k) = X.row(order[static_cast<size_t>(pos + k)]);
      const auto Xv = Xbatch.topRows(bsz);
      ws.forward(theta, Xv, mu);

      const float rho = theta[P - 1];
      const float sigma2 = static_cast<float>(softplus(rho));
      grad.setZero(P);
      float drho = 0.0f;
      for (long k = 0; k < bsz; ++k) {
        const float resid = y[order[static_cast<size_t>(pos + k)]] - mu[k];
        dmu[k] = -scale * resid / sigma2;
        drho += -scale * (-0.5f / sigma2 + resid * resid / (2.0f * sigma2 * sigma2));
      }
      ws.backward(theta, Xv, dmu.head(bsz), grad);
      grad[P - 1] += drho * static_cast<float>(sigmoid(rho));
      grad += theta;  // unit-variance Gaussian prior
    };

    VecF theta0(P);
    rng.fill_normal(theta0.data(), static_cast<size_t>(P));
    theta0 *= 0.05f;
    theta0[P - 1] = -2.0f;

    epoch_of_last = -1;
    const auto samples = sghmc_sample<float>(grad_fn, theta0, scfg, rng);

    // Ensemble EI over the shared candidate scheme.
    const Eigen::MatrixXd cands =
        acquisition_candidates(rng, rec.best_x_unit(), dim, config.candidates,
                               config.uniform_frac, config.local_sigma);
    const MatF candsF = cands.cast<float>();
    const int M = static_cast<int>(samples.size());
    MatF mus(cands.rows(), M);
    Eigen::VectorXd sig2(M);
    VecF mu_col;
    for (int s = 0; s < M; ++s) {
      ws.forward(samples[static_cast<size_t>(s)], candsF, mu_col);
      mus.col(s) = mu_col;
      sig2[s] = softplus(static_cast<double>(samples[static_cast<size_t>(s)][P - 1]));
    }
    const double mean_noise = sig2.mean();
    const double y_best_std = (rec.best_y() - y_mean) / y_sd;

    int best_idx = 0;
    double best_acq = -1.0;
    for (Eigen::Index c = 0; c < cands.rows(); ++c) {
      const double mu_c = static_cast<double>(mus.row(c).mean());
      const double spread =
          (mus.row(c).cast<double>().array() - mu_c).square().mean();
      const double var = spread + mean_noise;
      const double acq = expected_improvement(mu_c, std::sqrt(var), y_best_std);
      if (acq > best_acq) {
        best_acq = acq;
        best_idx = static_cast<int>(c);
      }
    }
    rec.eval(cands.row(best_idx).transpose());
  }
  return rec.take();
}

}  // namespace metabench
