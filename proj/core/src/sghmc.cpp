#include "metabench/sghmc.hpp"

namespace metabench {

template std::vector<Eigen::Matrix<double, Eigen::Dynamic, 1>> sghmc_sample<double>(
    const std::function<void(const Eigen::Matrix<double, Eigen::Dynamic, 1>&,
                             Eigen::Matrix<double, Eigen::Dynamic, 1>&, long)>&,
    const Eigen::Matrix<double, Eigen::Dynamic, 1>&, const SghmcConfig&, Rng&);

template std::vector<Eigen::Matrix<float, Eigen::Dynamic, 1>> sghmc_sample<float>(
    const std::function<void(const Eigen::Matrix<float, Eigen::Dynamic, 1>&,
                             Eigen::Matrix<float, Eigen::Dynamic, 1>&, long)>&,
    const Eigen::Matrix<float, Eigen::Dynamic, 1>&, const SghmcConfig&, Rng&);

}  // namespace metabench
