#pragma once

#include <Eigen/Core>
#include <cmath>

namespace metabench {

// Matérn-5/2: k(r) = sv * (1 + sqrt(5) r / l + 5 r^2 / (3 l^2)) exp(-sqrt(5) r / l)
inline double matern52(double r, double signal_var, double lengthscale) {
  const double u = std::sqrt(5.0) * r / lengthscale;
  return signal_var * (1.0 + u + u * u / 3.0) * std::exp(-u);
}

// ARD form over scaled squared distance r2 = sum_q (a_q - b_q)^2 / l_q^2.
inline double matern52_r2(double r2, double signal_var) {
  const double u = std::sqrt(5.0 * r2);
  return signal_var * (1.0 + u + u * u / 3.0) * std::exp(-u);
}

// phi = (dk/dr) / r, continuous at r = 0 (equals -5/3 * sv there).
// dk/da_q = phi * (a_q - b_q) / l_q^2 ; dk/dl_q = -phi * (a_q - b_q)^2 / l_q^3.
inline double matern52_phi(double r2, double signal_var) {
  const double u = std::sqrt(5.0 * r2);
  return -signal_var * (5.0 / 3.0) * (1.0 + u) * std::exp(-u);
}

}  // namespace metabench
