#include "metabench/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace metabench {

namespace {
double subset_mean(const Eigen::VectorXd& y, const std::vector<int>& rows,
                   int begin, int end) {
  double acc = 0.0;
  for (int i = begin; i < end; ++i) acc += y[rows[static_cast<size_t>(i)]];
  return acc / (end - begin);
}
}  // namespace

int RandomForest::build_node(std::vector<Node>& tree, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& y, std::vector<int>& rows,
                             int begin, int end,
                             const RandomForestConfig& config, Rng& rng) {
  const int node_id = static_cast<int>(tree.size());
  tree.emplace_back();
  const int n = end - begin;
  const int dim = static_cast<int>(X.cols());

  double mean = subset_mean(y, rows, begin, end);
  double sse = 0.0;
  for (int i = begin; i < end; ++i) {
    const double d = y[rows[static_cast<size_t>(i)]] - mean;
    sse += d * d;
  }
  if (n < 2 * config.min_leaf || sse <= 1e-24) {
    tree[static_cast<size_t>(node_id)].value = mean;
    return node_id;
  }

  // Random feature subset of size ceil(5 D / 6).
  const int n_feat = std::max(1, (5 * dim + 5) / 6);
  std::vector<int> feats(static_cast<size_t>(dim));
  std::iota(feats.begin(), feats.end(), 0);
  for (int i = 0; i < n_feat; ++i) {
    const int j = i + static_cast<int>(rng.uniform_int(dim - i));
    std::swap(feats[static_cast<size_t>(i)], feats[static_cast<size_t>(j)]);
  }

  int best_feat = -1;
  double best_thresh = 0, best_score = sse;
  std::vector<std::pair<double, double>> vals(static_cast<size_t>(n));
  for (int f = 0; f < n_feat; ++f) {
    const int feat = feats[static_cast<size_t>(f)];
    for (int i = 0; i < n; ++i) {
      const int r = rows[static_cast<size_t>(begin + i)];
      vals[static_cast<size_t>(i)] = {X(r, feat), y[r]};
    }
    std::sort(vals.begin(), vals.end());
    // prefix sums for variance reduction
    double left_sum = 0, left_sq = 0;
    double total_sum = 0, total_sq = 0;
    for (const auto& [xv, yv] : vals) {
      total_sum += yv;
      total_sq += yv * yv;
    }
    for (int i = 0; i < n - 1; ++i) {
      left_sum += vals[static_cast<size_t>(i)].second;
      left_sq += vals[static_cast<size_t>(i)].second * vals[static_cast<size_t>(i)].second;
      const int nl = i + 1, nr = n - nl;
      if (nl < config.min_leaf || nr < config.min_leaf) continue;
      if (vals[static_cast<size_t>(i)].first == vals[static_cast<size_t>(i + 1)].first)
        continue;
      const double right_sum = total_sum - left_sum;
      const double right_sq = total_sq - left_sq;
      const double score = (left_sq - left_sum * left_sum / nl) +
                           (right_sq - right_sum * right_sum / nr);
      if (score < best_score - 1e-12) {
        best_score = score;
        best_feat = feat;
        best_thresh = 0.5 * (vals[static_cast<size_t>(i)].first +
                             vals[static_cast<size_t>(i + 1)].first);
      }
    }
  }

  if (best_feat < 0) {
    tree[static_cast<size_t>(node_id)].value = mean;
    return node_id;
  }

  auto mid = std::partition(rows.begin() + begin, rows.begin() + end,
                            [&](int r) { return X(r, best_feat) <= best_thresh; });
  const int split_at = static_cast<int>(mid - rows.begin());
  if (split_at == begin || split_at == end) {
    tree[static_cast<size_t>(node_id)].value = mean;
    return node_id;
  }
  const int left = build_node(tree, X, y, rows, begin, split_at, config, rng);
  const int right = build_node(tree, X, y, rows, split_at, end, config, rng);
  tree[static_cast<size_t>(node_id)].feature = best_feat;
  tree[static_cast<size_t>(node_id)].threshold = best_thresh;
  tree[static_cast<size_t>(node_id)].left = left;
  tree[static_cast<size_t>(node_id)].right = right;
  return node_id;
}

void RandomForest::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const RandomForestConfig& config, Rng& rng) {
  if (X.rows() != y.size() || X.rows() < 1)
    throw ValidationError("random forest: bad training shapes");
  trees_.clear();
  trees_.resize(static_cast<size_t>(config.num_trees));
  const int n = static_cast<int>(X.rows());
  for (auto& tree : trees_) {
    std::vector<int> rows(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      rows[static_cast<size_t>(i)] = static_cast<int>(rng.uniform_int(n));
    build_node(tree, X, y, rows, 0, n, config, rng);
  }
}

double RandomForest::predict_tree(int tree, const Eigen::VectorXd& x) const {
  const auto& t = trees_[static_cast<size_t>(tree)];
  int at = 0;
  while (t[static_cast<size_t>(at)].feature >= 0) {
    const auto& n = t[static_cast<size_t>(at)];
    at = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return t[static_cast<size_t>(at)].value;
}

Eigen::VectorXd RandomForest::predict_per_tree(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(num_trees());
  for (int i = 0; i < num_trees(); ++i) out[i] = predict_tree(i, x);
  return out;
}

void RandomForest::predict(const Eigen::VectorXd& x, double& mean,
                           double& var) const {
  const Eigen::VectorXd preds = predict_per_tree(x);
  mean = preds.mean();
  var = (preds.array() - mean).square().sum() / preds.size();
}

}  // namespace metabench
