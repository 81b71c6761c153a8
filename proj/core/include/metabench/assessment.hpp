#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "metabench/common.hpp"
#include "metabench/optimizers.hpp"

namespace metabench {

// ---------------------------------------------------------------------------
// Runtime-to-target

struct RuntimeRecord {
  std::string method;
  std::uint64_t task_id = 0;
  std::uint64_t seed = 0;
  double y_target = 0.0;
  std::optional<int> runtime;  // 1-based function-evaluation index; nullopt = censored

  bool censored() const { return !runtime.has_value(); }
};

// 1-based index of the first evaluation with y <= y_target; censored when
// the target is never reached.
std::optional<int> runtime_to_target(const Trajectory& trajectory, double y_target);
std::optional<int> runtime_to_target(const std::vector<double>& ys, double y_target);

// Noiseless task values on a probe grid; optionally reduced to a quantile
// subset (linear-interpolation quantiles of the sorted values).
std::vector<double> make_targets(const Objective& task,
                                 const std::vector<Config>& probe_grid);
std::vector<double> quantile_targets(std::vector<double> values,
                                     const std::vector<double>& quantiles);

// ---------------------------------------------------------------------------
// ECDF over (task, target) pairs

struct EcdfCurve {
  std::vector<int> budgets;      // increasing
  std::vector<double> fractions; // non-decreasing, in [0, 1]
};

EcdfCurve ecdf(const std::vector<RuntimeRecord>& records,
               const std::vector<int>& budgets);

// ---------------------------------------------------------------------------
// Rankings

// Ascending fractional ranking: lower value = better = rank 1; ties get the
// average of their ordinal ranks.
std::vector<double> fractional_ranks(const std::vector<double>& values);

struct RankTable {
  std::vector<std::string> methods;
  Eigen::MatrixXd avg_rank;  // K x iterations
  int bootstrap_size = 0;

  int iterations() const { return static_cast<int>(avg_rank.cols()); }
};

// curves[k][task][run] = incumbent curve of one run. For each task, B
// bootstrap draws pick one run per method; fractional ranks per iteration
// are averaged over draws, then over tasks. Shorter curves hold their last
// incumbent.
RankTable bootstrap_ranking(
    const std::vector<std::string>& methods,
    const std::vector<std::vector<std::vector<std::vector<double>>>>& curves,
    int bootstrap_size, Rng& rng);

// ---------------------------------------------------------------------------
// Mann-Whitney U

// U statistic of sample A (pairs with a > b counted, ties half) computed via
// midranks; U_A + U_B = n*m.
double mann_whitney_statistic(const std::vector<double>& a,
                              const std::vector<double>& b);

// One-sided p-value for the alternative "A is stochastically smaller".
// Exact enumeration (rank-count recursion) when n*m <= 400 and there are no
// ties; otherwise normal approximation with tie and continuity corrections.
double mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

struct UTestMatrix {
  std::vector<std::string> methods;
  Eigen::MatrixXd p;  // K x K, diagonal NaN
  // Fixed orientation: p(row, col) tests "column outperforms row".
  static constexpr const char* kOrientation = "column_outperforms_row";
};

// samples[k] = per-method performance samples (lower = better); entry
// (row, col) = mann_whitney_u(samples[col], samples[row]).
UTestMatrix pairwise_utest_matrix(const std::vector<std::string>& methods,
                                  const std::vector<std::vector<double>>& samples);

// Consecutive groups of `group_size` values are averaged; the tail that does
// not fill a group is dropped.
std::vector<double> group_means(const std::vector<double>& values, int group_size);

// ---------------------------------------------------------------------------
// Monte-Carlo score estimate

struct ScoreEstimate {
  std::string method;
  double mean = 0.0;
  std::optional<double> se;  // undefined for a single task
};

ScoreEstimate score_estimate(const std::string& method,
                             const std::vector<double>& per_task_values);

}  // namespace metabench
