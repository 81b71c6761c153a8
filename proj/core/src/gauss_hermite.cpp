#include "metabench/gauss_hermite.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "metabench/common.hpp"

namespace metabench {

GaussHermite gauss_hermite(int degree) {
  if (degree < 1) throw ValidationError("gauss_hermite: degree must be >= 1");
  if (degree == 1) return {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};

  // Golub-Welsch on the Jacobi matrix of the (probabilists') Hermite
  // recurrence: off-diagonal beta_i = sqrt(i).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 1; i < degree; ++i) {
    const double b = std::sqrt(static_cast<double>(i));
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussHermite rule;
  rule.nodes = es.eigenvalues();
  rule.weights = es.eigenvectors().row(0).transpose().array().square();
  rule.weights /= rule.weights.sum();
  return rule;
}

TensorGrid gauss_hermite_grid(int degree, int q) {
  if (q < 1) throw ValidationError("gauss_hermite_grid: q must be >= 1");
  const GaussHermite rule = gauss_hermite(degree);
  long total = 1;
  for (int i = 0; i < q; ++i) total *= degree;

  TensorGrid grid;
  grid.nodes.resize(total, q);
  grid.weights.resize(total);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    double w = 1.0;
    for (int d = 0; d < q; ++d) {
      const long k = rem % degree;
      rem /= degree;
      grid.nodes(idx, d) = rule.nodes[k];
      w *= rule.weights[k];
    }
    grid.weights[idx] = w;
  }
  return grid;
}

}  // namespace metabench
