#pragma once

#include <Eigen/Core>

namespace metabench {

// Probabilists' Gauss-Hermite rule: E_{x~N(0,1)}[f(x)] ~= sum_i w_i f(x_i).
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

GaussHermite gauss_hermite(int degree);

// Tensor-product rule over N(0, I_q): rows of `nodes` are q-dimensional
// quadrature points, `weights` the matching product weights.
struct TensorGrid {
  Eigen::MatrixXd nodes;   // degree^q x q
  Eigen::VectorXd weights; // degree^q
};

TensorGrid gauss_hermite_grid(int degree, int q);

}  // namespace metabench
