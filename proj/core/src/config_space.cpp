#include "metabench/config_space.hpp"

#include <cmath>

namespace metabench {

ConfigSpace::ConfigSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw ValidationError("config space needs at least one dimension");
  for (const auto& d : dims_) {
    if (!(d.lower < d.upper))
      throw ValidationError("dimension '" + d.name + "': lower must be < upper");
    if (d.log_scale && !(d.lower > 0.0))
      throw ValidationError("dimension '" + d.name + "': log scale requires lower > 0");
    if (!std::isfinite(d.lower) || !std::isfinite(d.upper))
      throw ValidationError("dimension '" + d.name + "': bounds must be finite");
  }
}

bool ConfigSpace::contains(const Config& x) const {
  if (x.size() != dimension()) return false;
  for (int i = 0; i < dimension(); ++i) {
    if (!(x[i] >= dims_[i].lower && x[i] <= dims_[i].upper)) return false;
  }
  return true;
}

void ConfigSpace::validate(const Config& x) const {
  if (x.size() != dimension())
    throw ValidationError("config has " + std::to_string(x.size()) +
                          " values, space has " + std::to_string(dimension()) +
                          " dimensions");
  for (int i = 0; i < dimension(); ++i) {
    if (!(x[i] >= dims_[i].lower && x[i] <= dims_[i].upper))
      throw ValidationError("dimension '" + dims_[i].name + "': value " +
                            std::to_string(x[i]) + " outside [" +
                            std::to_string(dims_[i].lower) + ", " +
                            std::to_string(dims_[i].upper) + "]");
  }
}

Eigen::VectorXd ConfigSpace::to_unit(const Config& x) const {
  validate(x);
  Eigen::VectorXd u(dimension());
  for (int i = 0; i < dimension(); ++i) {
    const auto& d = dims_[i];
    if (d.log_scale) {
      u[i] = (std::log(x[i]) - std::log(d.lower)) /
             (std::log(d.upper) - std::log(d.lower));
    } else {
      u[i] = (x[i] - d.lower) / (d.upper - d.lower);
    }
    u[i] = std::min(1.0, std::max(0.0, u[i]));
  }
  return u;
}

Config ConfigSpace::from_unit(const Eigen::VectorXd& u) const {
  if (u.size() != dimension())
    throw ValidationError("unit vector size does not match space dimension");
  Config x(dimension());
  for (int i = 0; i < dimension(); ++i) {
    const auto& d = dims_[i];
    const double z = std::min(1.0, std::max(0.0, u[i]));
    if (d.log_scale) {
      const double ll = std::log(d.lower), lu = std::log(d.upper);
      x[i] = std::exp(ll + z * (lu - ll));
    } else {
      x[i] = d.lower + z * (d.upper - d.lower);
    }
    x[i] = std::min(d.upper, std::max(d.lower, x[i]));
  }
  return x;
}

bool ConfigSpace::operator==(const ConfigSpace& other) const {
  if (dims_.size() != other.dims_.size()) return false;
  for (size_t i = 0; i < dims_.size(); ++i) {
    const auto& a = dims_[i];
    const auto& b = other.dims_[i];
    if (a.name != b.name || a.lower != b.lower || a.upper != b.upper ||
        a.log_scale != b.log_scale)
      return false;
  }
  return true;
}

Eigen::MatrixXd normalize_inputs(const ConfigSpace& space,
                                 const std::vector<Config>& configs) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(configs.size()), space.dimension());
  for (size_t r = 0; r < configs.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = space.to_unit(configs[r]).transpose();
  return out;
}

}  // namespace metabench
