#pragma once

#include <Eigen/Core>
#include <vector>

#include "metabench/common.hpp"

namespace metabench {

struct RandomForestConfig {
  int num_trees = 10;
  int min_leaf = 3;
};

// Regression forest: bootstrap per tree, random feature subsets per split,
// variance-reduction splits. Predictive mean/variance are the across-tree
// mean and variance of the per-tree predictions.
class RandomForest {
 public:
  void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
           const RandomForestConfig& config, Rng& rng);

  int num_trees() const { return static_cast<int>(trees_.size()); }
  double predict_tree(int tree, const Eigen::VectorXd& x) const;
  Eigen::VectorXd predict_per_tree(const Eigen::VectorXd& x) const;
  void predict(const Eigen::VectorXd& x, double& mean, double& var) const;

 private:
  struct Node {
    int feature = -1;      // -1: leaf
    double threshold = 0;
    int left = -1, right = -1;
    double value = 0;      // leaf mean
  };
  std::vector<std::vector<Node>> trees_;

  int build_node(std::vector<Node>& tree, const Eigen::MatrixXd& X,
                 const Eigen::VectorXd& y, std::vector<int>& rows, int begin,
                 int end, const RandomForestConfig& config, Rng& rng);
};

}  // namespace metabench
