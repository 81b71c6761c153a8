#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "metabench/common.hpp"

namespace metabench {

// One hyperparameter configuration in native (un-normalized) units.
using Config = Eigen::VectorXd;

struct Dimension {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  bool log_scale = false;
};

// Box-bounded input domain. Immutable after construction; log-scaled
// dimensions are mapped through the natural log before the affine unit map.
class ConfigSpace {
 public:
  ConfigSpace() = default;
  explicit ConfigSpace(std::vector<Dimension> dims);

  int dimension() const { return static_cast<int>(dims_.size()); }
  const std::vector<Dimension>& dims() const { return dims_; }
  const Dimension& dim(int i) const { return dims_.at(static_cast<size_t>(i)); }

  bool contains(const Config& x) const;
  // Throws ValidationError naming the offending dimension.
  void validate(const Config& x) const;

  // Affine map onto [0,1]^D (after log transform where flagged).
  Eigen::VectorXd to_unit(const Config& x) const;
  Config from_unit(const Eigen::VectorXd& u) const;

  bool operator==(const ConfigSpace& other) const;

 private:
  std::vector<Dimension> dims_;
};

// Row-per-config normalization of a batch; validates every config.
Eigen::MatrixXd normalize_inputs(const ConfigSpace& space,
                                 const std::vector<Config>& configs);

}  // namespace metabench
