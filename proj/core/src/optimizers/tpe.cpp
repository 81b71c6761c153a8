#include <algorithm>
#include <cmath>
#include <numeric>

#include "metabench/optimizers.hpp"

namespace metabench {

int tpe_good_count(double gamma, int n_observations) {
  return static_cast<int>(std::ceil(gamma * n_observations));
}

namespace {

// Per-dimension Gaussian KDE with a Silverman-style bandwidth, floored so a
// degenerate point set still yields a proper density.
struct Kde1d {
  std::vector<double> centers;
  double bandwidth = 1.0;

  void fit(std::vector<double> xs) {
    centers = std::move(xs);
    const auto n = centers.size();
    double mean = std::accumulate(centers.begin(), centers.end(), 0.0) / n;
    double var = 0.0;
    for (double x : centers) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    bandwidth = std::max(1.06 * sd * std::pow(static_cast<double>(n), -0.2), 1e-3);
  }

  double log_density(double x) const {
    double acc = 0.0;
    for (double c : centers) {
      const double z = (x - c) / bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    acc = std::max(acc, 1e-300);
    return std::log(acc / (centers.size() * bandwidth * std::sqrt(2.0 * M_PI)));
  }
};

}  // namespace

// Startup phase is plain random search; afterwards observations are split at
// the gamma-quantile into good/bad sets, per-dimension KDEs l(x) and g(x)
// are fit, and the candidate maximizing l(x)/g(x) among n_candidates draws
// from l is evaluated next.
Trajectory run_tpe(const Objective& objective, int budget, std::uint64_t seed,
                   const TpeConfig& config) {
  RunRecorder rec(objective, Method::tpe, budget, seed);
  Rng& rng = rec.rng();
  const int dim = rec.dimension();

  while (!rec.exhausted() && rec.used() < config.n_startup)
    rec.eval(rec.uniform_point());

  while (!rec.exhausted()) {
    const auto& xs = rec.history_x_unit();
    const auto& ys = rec.history_y();
    const int n = static_cast<int>(ys.size());
    const int n_good = std::min(tpe_good_count(config.gamma, n), n - 1);

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ys[static_cast<size_t>(a)] < ys[static_cast<size_t>(b)]; });

    std::vector<Kde1d> good(static_cast<size_t>(dim)), bad(static_cast<size_t>(dim));
    for (int d = 0; d < dim; ++d) {
      std::vector<double> gx, bx;
      for (int i = 0; i < n; ++i) {
        const double v = xs[static_cast<size_t>(order[static_cast<size_t>(i)])][d];
        (i < n_good ? gx : bx).push_back(v);
      }
      good[static_cast<size_t>(d)].fit(std::move(gx));
      bad[static_cast<size_t>(d)].fit(std::move(bx));
    }

    Eigen::VectorXd best_cand(dim);
    double best_score = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < config.n_candidates; ++c) {
      Eigen::VectorXd cand(dim);
      for (int d = 0; d < dim; ++d) {
        const auto& k = good[static_cast<size_t>(d)];
        const double center = k.centers[rng.uniform_int(k.centers.size())];
        cand[d] = std::min(1.0, std::max(0.0, center + k.bandwidth * rng.normal()));
      }
      double score = 0.0;
      for (int d = 0; d < dim; ++d)
        score += good[static_cast<size_t>(d)].log_density(cand[d]) -
                 bad[static_cast<size_t>(d)].log_density(cand[d]);
      if (score > best_score) {
        best_score = score;
        best_cand = cand;
      }
    }
    rec.eval(best_cand);
  }
  return rec.take();
}

}  // namespace metabench
