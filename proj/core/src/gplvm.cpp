#include "metabench/gplvm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "metabench/kernels.hpp"
#include "metabench/lbfgs.hpp"

namespace metabench {

namespace {

constexpr double kMinLengthscale = 1e-6;

// Cholesky with an escalating diagonal jitter, scaled by the mean diagonal.
Eigen::LLT<Eigen::MatrixXd> chol_with_jitter(const Eigen::MatrixXd& M,
                                             const char* what) {
  const double scale = M.diagonal().mean();
  for (double jitter : {0.0, 1e-8, 1e-6, 1e-4}) {
    Eigen::MatrixXd J = M;
    if (jitter > 0) J.diagonal().array() += jitter * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(J);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw Error(std::string(what) + ": Cholesky failed after jitter ladder 1e-8..1e-4");
}

}  // namespace

int auto_gh_degree(int latent_dim) {
  switch (latent_dim) {
    case 1: return 20;
    case 2: return 9;
    case 3: return 6;
    case 4: return 5;
    default: return 4;
  }
}

GplvmBound::GplvmBound(const Eigen::MatrixXd& standardized_targets,
                       int latent_dim, int inducing_count, int gh_degree)
    : Y_(standardized_targets),
      T_(static_cast<int>(standardized_targets.rows())),
      N_(static_cast<int>(standardized_targets.cols())),
      Q_(latent_dim),
      m_(inducing_count) {
  if (T_ < 2) throw ValidationError("gplvm: need at least 2 tasks");
  if (N_ < 2) throw ValidationError("gplvm: need at least 2 grid points");
  if (Q_ < 1) throw ValidationError("gplvm: latent_dim must be >= 1");
  if (m_ < 1 || m_ > T_)
    throw ValidationError("gplvm: inducing_count must be in [1, T]");
  quad_ = gauss_hermite_grid(gh_degree > 0 ? gh_degree : auto_gh_degree(Q_), Q_);
}

int GplvmBound::num_params() const { return 2 * T_ * Q_ + m_ * Q_ + Q_ + 2; }

Eigen::VectorXd GplvmBound::pack(const Eigen::MatrixXd& means,
                                 const Eigen::MatrixXd& log_vars,
                                 const Eigen::MatrixXd& inducing,
                                 const Eigen::VectorXd& log_ls, double log_sv,
                                 double log_noise) const {
  Eigen::VectorXd p(num_params());
  int at = 0;
  for (int t = 0; t < T_; ++t)
    for (int q = 0; q < Q_; ++q) p[at++] = means(t, q);
  for (int t = 0; t < T_; ++t)
    for (int q = 0; q < Q_; ++q) p[at++] = log_vars(t, q);
  for (int i = 0; i < m_; ++i)
    for (int q = 0; q < Q_; ++q) p[at++] = inducing(i, q);
  for (int q = 0; q < Q_; ++q) p[at++] = log_ls[q];
  p[at++] = log_sv;
  p[at++] = log_noise;
  return p;
}

Eigen::MatrixXd GplvmBound::means_of(const Eigen::VectorXd& p) const {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(p.data(), T_, Q_);
}
Eigen::MatrixXd GplvmBound::vars_of(const Eigen::VectorXd& p) const {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(p.data() + T_ * Q_, T_, Q_)
      .array()
      .exp();
}
Eigen::MatrixXd GplvmBound::inducing_of(const Eigen::VectorXd& p) const {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(p.data() + 2 * T_ * Q_, m_, Q_);
}
Eigen::VectorXd GplvmBound::lengthscales_of(const Eigen::VectorXd& p) const {
  return p.segment(2 * T_ * Q_ + m_ * Q_, Q_).array().exp();
}
double GplvmBound::signal_var_of(const Eigen::VectorXd& p) const {
  return std::exp(p[num_params() - 2]);
}
double GplvmBound::noise_var_of(const Eigen::VectorXd& p) const {
  return std::exp(p[num_params() - 1]);
}

double GplvmBound::value(const Eigen::VectorXd& params) const {
  Eigen::VectorXd g;
  return value_and_grad(params, g);
}

double GplvmBound::value_and_grad(const Eigen::VectorXd& params,
                                  Eigen::VectorXd& grad) const {
  using Eigen::ArrayXd;
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  const int TQ = T_ * Q_;
  int at = 0;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      means(params.data(), T_, Q_);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      log_vars(params.data() + TQ, T_, Q_);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      Z(params.data() + 2 * TQ, m_, Q_);
  at = 2 * TQ + m_ * Q_;

  ArrayXd ls = params.segment(at, Q_).array().exp();
  Eigen::Array<bool, Eigen::Dynamic, 1> clamped_dim(Q_);
  clamped_ = false;
  for (int q = 0; q < Q_; ++q) {
    clamped_dim[q] = ls[q] < kMinLengthscale;
    if (clamped_dim[q]) {
      ls[q] = kMinLengthscale;
      clamped_ = true;
    }
  }
  const double sv = std::exp(params[at + Q_]);
  // Noise floor keeps the collapsed-noise limit finite on interpolable data.
  constexpr double kMinNoise = 1e-6;
  const double s_raw = std::exp(params[at + Q_ + 1]);
  const bool noise_clamped = s_raw < kMinNoise;
  const double s = noise_clamped ? kMinNoise : s_raw;  // noise variance

  const ArrayXd inv_ls2 = 1.0 / (ls * ls);
  const MatrixXd Zs = Z.array().rowwise() * inv_ls2.sqrt().transpose();  // m x Q

  // --- Kernel matrix on inducing points.
  MatrixXd K(m_, m_);
  for (int i = 0; i < m_; ++i) {
    K(i, i) = sv;
    for (int j = 0; j < i; ++j) {
      const double r2 = (Zs.row(i) - Zs.row(j)).squaredNorm();
      K(i, j) = K(j, i) = matern52_r2(r2, sv);
    }
  }
  const auto lltK = chol_with_jitter(K, "gplvm K_mm");

  // --- Psi statistics by quadrature.
  const long G = quad_.nodes.rows();
  const double psi0 = static_cast<double>(T_) * sv;
  MatrixXd Psi1 = MatrixXd::Zero(T_, m_);
  MatrixXd Psi2 = MatrixXd::Zero(m_, m_);
  const MatrixXd sd = log_vars.array().exp().sqrt();  // T x Q

  VectorXd kvec(m_), hs(Q_);
  for (int t = 0; t < T_; ++t) {
    for (long g = 0; g < G; ++g) {
      for (int q = 0; q < Q_; ++q)
        hs[q] = (means(t, q) + sd(t, q) * quad_.nodes(g, q)) * std::sqrt(inv_ls2[q]);
      for (int i = 0; i < m_; ++i) {
        const double r2 = (Zs.row(i).transpose() - hs).squaredNorm();
        kvec[i] = matern52_r2(r2, sv);
      }
      const double w = quad_.weights[g];
      Psi1.row(t) += w * kvec.transpose();
      Psi2.selfadjointView<Eigen::Lower>().rankUpdate(kvec, w);
    }
  }
  Psi2 = Psi2.selfadjointView<Eigen::Lower>();

  // --- Bound terms.
  MatrixXd A = K + Psi2 / s;
  const auto lltA = chol_with_jitter(A, "gplvm A");

  const double logdetK = 2.0 * lltK.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdetA = 2.0 * lltA.matrixL().toDenseMatrix().diagonal().array().log().sum();

  const MatrixXd C = Psi1.transpose() * Y_;        // m x N
  const MatrixXd E = lltA.solve(C);                // A^-1 C
  const double quad_term = (C.array() * E.array()).sum();
  const MatrixXd KinvPsi2 = lltK.solve(Psi2);
  const double tr_KinvPsi2 = KinvPsi2.trace();
  const double yy = Y_.squaredNorm();

  double kl = 0.0;
  for (int t = 0; t < T_; ++t)
    for (int q = 0; q < Q_; ++q) {
      const double v = sd(t, q) * sd(t, q);
      kl += means(t, q) * means(t, q) + v - std::log(v) - 1.0;
    }
  kl *= 0.5;

  const double Nd = static_cast<double>(N_);
  const double F = -0.5 * Nd * T_ * std::log(2.0 * M_PI * s) +
                   0.5 * Nd * (logdetK - logdetA) - Nd * psi0 / (2.0 * s) +
                   Nd * tr_KinvPsi2 / (2.0 * s) - yy / (2.0 * s) +
                   quad_term / (2.0 * s * s) - kl;

  // --- Adjoints of the matrix-level quantities.
  const MatrixXd Ainv = lltA.solve(MatrixXd::Identity(m_, m_));
  const MatrixXd Kinv = lltK.solve(MatrixXd::Identity(m_, m_));
  const MatrixXd EEt = E * E.transpose();

  const MatrixXd dA = -0.5 * Nd * Ainv - EEt / (2.0 * s * s);
  const MatrixXd P = KinvPsi2 * Kinv;  // K^-1 Psi2 K^-1
  MatrixXd GK = 0.5 * Nd * Kinv - 0.5 * Nd / s * P + dA;
  GK = 0.5 * (GK + GK.transpose()).eval();
  MatrixXd G2 = 0.5 * Nd / s * Kinv + dA / s;
  G2 = 0.5 * (G2 + G2.transpose()).eval();
  const MatrixXd G1 = (Y_ * E.transpose()) / (s * s);  // T x m
  const double dpsi0 = -Nd / (2.0 * s);

  double ds = -0.5 * Nd * T_ / s + Nd * psi0 / (2.0 * s * s) -
              Nd * tr_KinvPsi2 / (2.0 * s * s) + yy / (2.0 * s * s) -
              quad_term / (s * s * s) - (dA.array() * Psi2.array()).sum() / (s * s);

  // --- Accumulate parameter gradients.
  grad.setZero(num_params());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      g_means(grad.data(), T_, Q_);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      g_logvars(grad.data() + TQ, T_, Q_);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      g_Z(grad.data() + 2 * TQ, m_, Q_);
  double* g_logls = grad.data() + 2 * TQ + m_ * Q_;
  double& g_logsv = grad[num_params() - 2];
  double& g_lognoise = grad[num_params() - 1];

  // K_mm path.
  for (int i = 0; i < m_; ++i) {
    g_logsv += GK(i, i) * sv;  // diagonal: k = sv exactly
    for (int j = 0; j < m_; ++j) {
      if (j == i) continue;
      const double gk = GK(i, j);
      const VectorXd diff = (Z.row(i) - Z.row(j)).transpose();
      const double r2 = (diff.array().square() * inv_ls2).sum();
      const double kij = matern52_r2(r2, sv);
      const double phi = matern52_phi(r2, sv);
      for (int q = 0; q < Q_; ++q) {
        const double dq = diff[q];
        // z_i moves both K(i,j) and K(j,i); GK is symmetric.
        g_Z(i, q) += 2.0 * gk * phi * dq * inv_ls2[q];
        g_logls[q] += -gk * phi * dq * dq * inv_ls2[q];
      }
      g_logsv += gk * kij;
    }
  }

  // psi0 path.
  g_logsv += dpsi0 * static_cast<double>(T_) * sv;

  // Psi1/Psi2 path: one more sweep over tasks and quadrature nodes.
  VectorXd avec(m_), phiv(m_), hraw(Q_);
  for (int t = 0; t < T_; ++t) {
    for (long g = 0; g < G; ++g) {
      for (int q = 0; q < Q_; ++q) {
        hraw[q] = means(t, q) + sd(t, q) * quad_.nodes(g, q);
        hs[q] = hraw[q] * std::sqrt(inv_ls2[q]);
      }
      for (int i = 0; i < m_; ++i) {
        const double r2 = (Zs.row(i).transpose() - hs).squaredNorm();
        kvec[i] = matern52_r2(r2, sv);
        phiv[i] = matern52_phi(r2, sv);
      }
      const double w = quad_.weights[g];
      avec = w * (G1.row(t).transpose() + 2.0 * (G2 * kvec));
      g_logsv += avec.dot(kvec);
      for (int i = 0; i < m_; ++i) {
        const double aphi = avec[i] * phiv[i];
        for (int q = 0; q < Q_; ++q) {
          const double dq = hraw[q] - Z(i, q);
          const double c = aphi * dq * inv_ls2[q];
          g_means(t, q) += c;
          g_logvars(t, q) += c * (hraw[q] - means(t, q)) * 0.5;
          g_Z(i, q) -= c;
          g_logls[q] += -aphi * dq * dq * inv_ls2[q];
        }
      }
    }
  }

  // KL path.
  for (int t = 0; t < T_; ++t)
    for (int q = 0; q < Q_; ++q) {
      g_means(t, q) -= means(t, q);
      g_logvars(t, q) -= 0.5 * (sd(t, q) * sd(t, q) - 1.0);
    }

  // Noise variance: chain through log; pinned at the floor.
  g_lognoise = noise_clamped ? 0.0 : ds * s;

  // Clamped lengthscales do not move.
  for (int q = 0; q < Q_; ++q)
    if (clamped_dim[q]) g_logls[q] = 0.0;

  return F;
}

namespace {

// PCA scores of the task rows, scaled to unit variance per latent column.
Eigen::MatrixXd pca_init(const Eigen::MatrixXd& Y, int Q) {
  const Eigen::MatrixXd centered = Y.rowwise() - Y.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
  const int T = static_cast<int>(Y.rows());
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(T, Q);
  const int take = std::min<int>(Q, static_cast<int>(svd.singularValues().size()));
  scores.leftCols(take) =
      svd.matrixU().leftCols(take) *
      svd.singularValues().head(take).asDiagonal();
  for (int q = 0; q < Q; ++q) {
    const double sdv = std::sqrt(scores.col(q).squaredNorm() / T);
    if (sdv > 1e-12) scores.col(q) /= sdv;
  }
  return scores;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

EncoderModel train_encoder(const Eigen::MatrixXd& standardized_targets,
                           const LatentSpaceConfig& config) {
  const int T = static_cast<int>(standardized_targets.rows());
  const int N = static_cast<int>(standardized_targets.cols());
  if (T < 2) throw ValidationError("train_encoder: need at least 2 tasks");
  if (N < 2) throw ValidationError("train_encoder: need at least 2 grid points");
  const int Q = config.latent_dim;
  const int m = config.inducing_count > 0 ? std::min(config.inducing_count, T)
                                          : std::min(T, 32);

  GplvmBound bound(standardized_targets, Q, m, config.gh_degree);

  // Initialization: PCA means, variance 0.1, unit signal variance,
  // median-heuristic lengthscales, noise 0.1.
  const Eigen::MatrixXd means0 = pca_init(standardized_targets, Q);
  const Eigen::MatrixXd log_vars0 =
      Eigen::MatrixXd::Constant(T, Q, std::log(0.1));

  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Eigen::MatrixXd Z0(m, Q);
  if (m == T) {
    Z0 = means0;
  } else {
    // Deterministic stratified pick along the first principal direction.
    std::vector<int> order(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) order[static_cast<size_t>(t)] = t;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return means0(a, 0) < means0(b, 0); });
    for (int i = 0; i < m; ++i)
      Z0.row(i) = means0.row(order[static_cast<size_t>(i * T / m)]);
  }
  // Small perturbation keeps duplicated tasks from producing a singular K.
  for (int i = 0; i < m; ++i)
    for (int q = 0; q < Q; ++q) Z0(i, q) += 0.01 * rng.normal();

  Eigen::VectorXd log_ls0(Q);
  for (int q = 0; q < Q; ++q) {
    std::vector<double> dists;
    for (int a = 0; a < T; ++a)
      for (int b = 0; b < a; ++b)
        dists.push_back(std::abs(means0(a, q) - means0(b, q)));
    const double med = median(std::move(dists));
    log_ls0[q] = std::log(std::max(med, 0.5));
  }

  const Eigen::VectorXd x0 = bound.pack(means0, log_vars0, Z0, log_ls0,
                                        std::log(1.0), std::log(0.1));

  LbfgsOptions opts;
  opts.max_iters = config.max_iters;
  opts.rel_tol = config.rel_tol;
  int eval_iter = 0;
  auto objective = [&](const Eigen::VectorXd& p, Eigen::VectorXd& g) {
    ++eval_iter;
    double f;
    try {
      f = bound.value_and_grad(p, g);
    } catch (const Error&) {
      // Cholesky exhausted its jitter ladder: reject this trial point and
      // let the line search back off.
      g.setZero(p.size());
      return std::numeric_limits<double>::infinity();
    }
    g = -g;
    return -f;
  };
  const LbfgsResult res = lbfgs_minimize(objective, x0, opts);
  if (!std::isfinite(res.f))
    throw DivergenceError("gplvm: bound became non-finite", eval_iter);

  EncoderModel model;
  model.config = config;
  model.config.inducing_count = m;
  const Eigen::MatrixXd means = bound.means_of(res.x);
  const Eigen::MatrixXd vars = bound.vars_of(res.x);
  model.posteriors.resize(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    model.posteriors[static_cast<size_t>(t)].mean = means.row(t).transpose();
    model.posteriors[static_cast<size_t>(t)].var = vars.row(t).transpose();
  }
  model.lengthscales = bound.lengthscales_of(res.x);
  model.signal_var = bound.signal_var_of(res.x);
  model.noise_var = bound.noise_var_of(res.x);
  model.inducing = bound.inducing_of(res.x);
  model.bound = -res.f;
  model.bound_trace.reserve(res.trace.size());
  for (double v : res.trace) model.bound_trace.push_back(-v);
  Eigen::VectorXd gtmp;
  bound.value_and_grad(res.x, gtmp);
  model.lengthscale_clamped = bound.was_clamped();
  return model;
}

Eigen::VectorXd sample_latent(const TaskPosterior& posterior, Rng& rng) {
  Eigen::VectorXd h(posterior.mean.size());
  for (Eigen::Index q = 0; q < h.size(); ++q)
    h[q] = posterior.mean[q] + std::sqrt(posterior.var[q]) * rng.normal();
  return h;
}

}  // namespace metabench
