#pragma once

#include <Eigen/Core>
#include <vector>

#include "metabench/config_space.hpp"

namespace metabench {

// Highest dimension the embedded direction-number table supports.
int sobol_max_dimension();

// First `count` points of the (Gray-code ordered) Sobol sequence in
// [0,1]^dim. skip_initial drops the all-zeros origin, i.e. the sequence
// starts at index 1. Deterministic; throws UnsupportedDimensionError when
// dim exceeds the table.
Eigen::MatrixXd sobol_points01(int dim, long count, bool skip_initial = true);

// Sobol points mapped through the config space (inverse of the unit map).
std::vector<Config> sobol_grid(const ConfigSpace& space, long count,
                               bool skip_initial = true);

// The data-collection default: 100 * D grid points.
int default_grid_size(const ConfigSpace& space);

}  // namespace metabench
