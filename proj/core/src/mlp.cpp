#include "metabench/mlp.hpp"

namespace metabench {

int NetArchitecture::num_params() const {
  int total = 0, in = input_dim;
  for (int h : hidden) {
    total += h * in + h;
    in = h;
  }
  total += in + 1;  // output head
  total += 1;       // rho
  return total;
}

namespace {

// Scalar-path tanh matching the vectorized fast_tanh branches.
inline double tanh_scalar(double x) {
  if (std::abs(x) < 1e-3) {
    const double x2 = x * x;
    return x * (1.0 - x2 * (1.0 / 3.0 - x2 * (2.0 / 15.0)));
  }
  return 1.0 - 2.0 / (std::exp(2.0 * x) + 1.0);
}

}  // namespace

double mlp_forward_mu(const NetArchitecture& arch, const double* theta,
                      const Eigen::VectorXd& input) {
  thread_local Eigen::VectorXd h1, z;
  const double* p = theta;
  int in = arch.input_dim;
  h1 = input;
  for (int h : arch.hidden) {
    Eigen::Map<const Eigen::MatrixXd> W(p, h, in);
    p += h * in;
    Eigen::Map<const Eigen::VectorXd> b(p, h);
    p += h;
    z.resize(h);
    z.noalias() = W * h1;
    z += b;
    h1.resize(h);
    // same branch structure as fast_tanh, exp form vectorizes
    h1.array() = 1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0);
    for (Eigen::Index i = 0; i < h; ++i)
      if (std::abs(z[i]) < 1e-3) h1[i] = tanh_scalar(z[i]);
    in = h;
  }
  Eigen::Map<const Eigen::VectorXd> w_out(p, in);
  p += in;
  const double b_out = *p;
  return w_out.dot(h1) + b_out;
}

std::pair<double, double> mlp_forward(const NetArchitecture& arch,
                                      const double* theta,
                                      const Eigen::VectorXd& input) {
  const double mu = mlp_forward_mu(arch, theta, input);
  const double rho = theta[arch.num_params() - 1];
  return {mu, softplus(rho)};
}

Eigen::VectorXd mlp_forward_batch(const NetArchitecture& arch,
                                  const double* theta,
                                  const Eigen::MatrixXd& X) {
  Eigen::MatrixXd act = X;
  const double* p = theta;
  int in = arch.input_dim;
  for (int h : arch.hidden) {
    Eigen::Map<const Eigen::MatrixXd> W(p, h, in);
    p += h * in;
    Eigen::Map<const Eigen::VectorXd> b(p, h);
    p += h;
    Eigen::MatrixXd z = act * W.transpose();
    z.array().rowwise() += b.transpose().array();
    z.array() = fast_tanh(z.array());
    act = std::move(z);
    in = h;
  }
  Eigen::Map<const Eigen::VectorXd> w_out(p, in);
  p += in;
  const double b_out = *p;
  return (act * w_out).array() + b_out;
}

LogPosteriorParts log_posterior_and_grad(const NetArchitecture& arch,
                                         const Eigen::VectorXd& theta,
                                         const BnnData& data, double prior_var,
                                         Eigen::VectorXd& grad) {
  const auto n_rows = data.X.rows();
  if (data.y.size() != n_rows || static_cast<Eigen::Index>(data.task_of_row.size()) != n_rows)
    throw ValidationError("log_posterior: inconsistent row counts");
  if (data.latent_draws.empty())
    throw ValidationError("log_posterior: no latent draws");
  const int H = static_cast<int>(data.latent_draws.front().rows());
  const int Q = static_cast<int>(data.latent_draws.front().cols());
  if (arch.input_dim != static_cast<int>(data.X.cols()) + Q)
    throw ValidationError("log_posterior: arch input_dim != D + Q");

  MlpWorkspace<double> ws(arch);
  if (theta.size() != ws.num_params())
    throw ValidationError("log_posterior: theta size mismatch");
  grad.setZero(ws.num_params());

  const double rho = theta[ws.num_params() - 1];
  const double sigma2 = softplus(rho);
  const double dsig_drho = sigmoid(rho);

  // Expand every datapoint over its task's H latent draws.
  Eigen::MatrixXd Xfull(n_rows * H, arch.input_dim);
  for (Eigen::Index n = 0; n < n_rows; ++n) {
    const auto& draws = data.latent_draws[static_cast<size_t>(
        data.task_of_row[static_cast<size_t>(n)])];
    for (int j = 0; j < H; ++j) {
      Xfull.row(n * H + j) << data.X.row(n), draws.row(j);
    }
  }

  Eigen::VectorXd mu;
  ws.forward(theta, Xfull, mu);

  LogPosteriorParts parts;
  Eigen::VectorXd dmu(n_rows * H);
  double drho_acc = 0.0;
  const double invH = 1.0 / static_cast<double>(H);
  for (Eigen::Index n = 0; n < n_rows; ++n) {
    const double yn = data.y[n];
    for (int j = 0; j < H; ++j) {
      const double m = mu[n * H + j];
      const double resid = yn - m;
      if (!std::isfinite(m))
        throw DivergenceError(
            "log_posterior: non-finite prediction at datapoint " + std::to_string(n), n);
      parts.log_likelihood +=
          invH * (-0.5 * std::log(2.0 * M_PI * sigma2) -
                  resid * resid / (2.0 * sigma2));
      dmu[n * H + j] = invH * resid / sigma2;
      drho_acc += invH * (-0.5 / sigma2 + resid * resid / (2.0 * sigma2 * sigma2));
    }
  }
  ws.backward(theta, Xfull, dmu, grad);
  grad[ws.num_params() - 1] += drho_acc * dsig_drho;

  parts.log_prior = -0.5 * theta.squaredNorm() / prior_var -
                    0.5 * theta.size() * std::log(2.0 * M_PI * prior_var);
  grad -= theta / prior_var;
  return parts;
}

}  // namespace metabench
