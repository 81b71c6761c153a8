#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "metabench/common.hpp"

namespace metabench {

struct SghmcConfig {
  double step = 1e-2;        // base step length epsilon
  long burn_in = 50000;
  double friction = 0.01;    // momentum decay alpha
  int minibatch = 32;
  int num_samples = 100;     // M kept samples
  long keep_every = 100;     // steps between kept samples after burn-in
  int latent_draws = 10;     // H (used by the meta-model trainer)
  double prior_var = 1.0;
  // Number of datapoints behind the stochastic gradient; the step length is
  // scaled by 1/sqrt(grad_scale) so epsilon stays comparable across dataset
  // sizes. <= 0 means no scaling.
  double grad_scale = 0.0;

  void validate() const {
    if (!(step > 0)) throw ValidationError("sghmc: step must be > 0");
    if (burn_in < 0) throw ValidationError("sghmc: burn_in must be >= 0");
    if (num_samples < 1) throw ValidationError("sghmc: num_samples must be >= 1");
    if (keep_every < 1) throw ValidationError("sghmc: keep_every must be >= 1");
    if (latent_draws < 1) throw ValidationError("sghmc: latent_draws must be >= 1");
  }
};

// One scale-adapted SGHMC update:
//   v <- (1 - alpha) v - eta .* grad + noise
//   theta <- theta + v
// where eta is the preconditioned per-parameter step and `noise` is already
// drawn with the right scale. Exposed for direct testing.
template <typename T>
void sghmc_step(Eigen::Matrix<T, Eigen::Dynamic, 1>& theta,
                Eigen::Matrix<T, Eigen::Dynamic, 1>& v,
                const Eigen::Matrix<T, Eigen::Dynamic, 1>& grad,
                const Eigen::Matrix<T, Eigen::Dynamic, 1>& eta, T alpha,
                const Eigen::Matrix<T, Eigen::Dynamic, 1>& noise) {
  v = (T(1) - alpha) * v;
  v.array() -= eta.array() * grad.array();
  v += noise;
  theta += v;
}

// Draws M samples from exp(-U) using stochastic-gradient HMC with the
// robust per-parameter preconditioner: during burn-in an exponential moving
// average V of the squared gradient is accumulated, after burn-in it is
// frozen and the preconditioner is M^-1 = V^-1/2. The injected noise has
// variance 2*alpha*eta - eps_scaled^4, floored at a small positive value.
//
// grad_fn(theta, grad_out, step) writes the (possibly stochastic) gradient
// of U. Deterministic for a fixed rng state. Throws DivergenceError when
// |theta|_inf exceeds 1e6.
template <typename T>
std::vector<Eigen::Matrix<T, Eigen::Dynamic, 1>> sghmc_sample(
    const std::function<void(const Eigen::Matrix<T, Eigen::Dynamic, 1>&,
                             Eigen::Matrix<T, Eigen::Dynamic, 1>&, long)>& grad_fn,
    const Eigen::Matrix<T, Eigen::Dynamic, 1>& theta0, const SghmcConfig& config,
    Rng& rng) {
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  config.validate();
  const auto dim = theta0.size();

  const T eps = static_cast<T>(
      config.grad_scale > 0 ? config.step / std::sqrt(config.grad_scale)
                            : config.step);
  const T eps2 = eps * eps;
  const T eps4 = eps2 * eps2;
  const T alpha = static_cast<T>(config.friction);
  const T ema = T(0.99);

  Vec theta = theta0;
  Vec v = Vec::Zero(dim);
  Vec grad(dim), vhat(dim), eta(dim), noise_std(dim), noise(dim);
  bool vhat_init = false;

  std::vector<Vec> samples;
  samples.reserve(static_cast<size_t>(config.num_samples));
  const long total = config.burn_in + static_cast<long>(config.num_samples) * config.keep_every;

  for (long step = 0; step < total; ++step) {
    grad_fn(theta, grad, step);
    if (step < config.burn_in) {
      if (!vhat_init) {
        vhat = grad.array().square().max(T(1e-16));
        vhat_init = true;
      } else {
        vhat = ema * vhat + (T(1) - ema) * grad.array().square().matrix();
      }
      eta = eps2 * vhat.array().rsqrt();
      noise_std = (T(2) * alpha * eta.array() - eps4).max(T(1e-16) * eps2).sqrt();
    } else if (step == config.burn_in && config.burn_in == 0) {
      vhat = Vec::Ones(dim);
      eta = eps2 * vhat.array().rsqrt();
      noise_std = (T(2) * alpha * eta.array() - eps4).max(T(1e-16) * eps2).sqrt();
    }

    rng.fill_normal(noise.data(), static_cast<size_t>(dim));
    noise.array() *= noise_std.array();
    sghmc_step<T>(theta, v, grad, eta, alpha, noise);

    if (!theta.allFinite() || theta.template lpNorm<Eigen::Infinity>() > T(1e6))
      throw DivergenceError("sghmc: parameter magnitude exceeded 1e6", step);

    const long after = step + 1 - config.burn_in;
    if (after > 0 && after % config.keep_every == 0 &&
        static_cast<long>(samples.size()) < config.num_samples) {
      samples.push_back(theta);
    }
  }
  return samples;
}

}  // namespace metabench
