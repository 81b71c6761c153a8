#include "metabench/assessment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace metabench {

std::optional<int> runtime_to_target(const std::vector<double>& ys, double y_target) {
  for (size_t i = 0; i < ys.size(); ++i)
    if (ys[i] <= y_target) return static_cast<int>(i) + 1;
  return std::nullopt;
}

std::optional<int> runtime_to_target(const Trajectory& trajectory, double y_target) {
  return runtime_to_target(trajectory.ys, y_target);
}

std::vector<double> make_targets(const Objective& task,
                                 const std::vector<Config>& probe_grid) {
  if (probe_grid.empty()) throw ValidationError("make_targets: empty probe grid");
  std::vector<double> targets;
  targets.reserve(probe_grid.size());
  for (const auto& x : probe_grid) targets.push_back(task.evaluate_noiseless(x));
  return targets;
}

std::vector<double> quantile_targets(std::vector<double> values,
                                     const std::vector<double>& quantiles) {
  if (values.empty()) throw ValidationError("quantile_targets: no values");
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  out.reserve(quantiles.size());
  const auto n = values.size();
  for (double q : quantiles) {
    if (!(q >= 0.0 && q <= 1.0))
      throw ValidationError("quantile_targets: quantile outside [0, 1]");
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    out.push_back((1.0 - frac) * values[lo] + frac * values[hi]);
  }
  return out;
}

EcdfCurve ecdf(const std::vector<RuntimeRecord>& records,
               const std::vector<int>& budgets) {
  if (records.empty()) throw ValidationError("ecdf: no records");
  for (size_t i = 1; i < budgets.size(); ++i)
    if (budgets[i] <= budgets[i - 1])
      throw ValidationError("ecdf: budgets must be strictly increasing");
  EcdfCurve curve;
  curve.budgets = budgets;
  curve.fractions.reserve(budgets.size());
  const double denom = static_cast<double>(records.size());
  for (int b : budgets) {
    long solved = 0;
    for (const auto& r : records)
      if (!r.censored() && *r.runtime <= b) ++solved;
    curve.fractions.push_back(static_cast<double>(solved) / denom);
  }
  return curve;
}

std::vector<double> fractional_ranks(const std::vector<double>& values) {
  const auto k = values.size();
  if (k < 2) throw ValidationError("fractional_ranks: need at least 2 values");
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[static_cast<size_t>(a)] <
                                              values[static_cast<size_t>(b)]; });
  std::vector<double> ranks(k);
  size_t i = 0;
  while (i < k) {
    size_t j = i;
    while (j + 1 < k &&
           values[static_cast<size_t>(order[j + 1])] ==
               values[static_cast<size_t>(order[i])])
      ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (size_t t = i; t <= j; ++t) ranks[static_cast<size_t>(order[t])] = avg;
    i = j + 1;
  }
  return ranks;
}

RankTable bootstrap_ranking(
    const std::vector<std::string>& methods,
    const std::vector<std::vector<std::vector<std::vector<double>>>>& curves,
    int bootstrap_size, Rng& rng) {
  const auto K = methods.size();
  if (curves.size() != K) throw ValidationError("bootstrap_ranking: method/curve mismatch");
  if (K < 2) throw ValidationError("bootstrap_ranking: need at least 2 methods");
  const size_t n_tasks = curves.front().size();
  long iterations = 0;
  for (const auto& per_task : curves) {
    if (per_task.size() != n_tasks)
      throw ValidationError("bootstrap_ranking: methods disagree on task count");
    for (const auto& runs : per_task) {
      if (runs.empty()) throw ValidationError("bootstrap_ranking: missing curves");
      for (const auto& c : runs)
        iterations = std::max<long>(iterations, static_cast<long>(c.size()));
    }
  }

  RankTable table;
  table.methods = methods;
  table.bootstrap_size = bootstrap_size;
  table.avg_rank = Eigen::MatrixXd::Zero(static_cast<long>(K), iterations);

  std::vector<double> vals(K), ranks;
  std::vector<const std::vector<double>*> picked(K);
  Eigen::MatrixXd acc(static_cast<long>(K), iterations);
  for (size_t task = 0; task < n_tasks; ++task) {
    acc.setZero();
    for (int b = 0; b < bootstrap_size; ++b) {
      for (size_t k = 0; k < K; ++k) {
        const auto& runs = curves[k][task];
        picked[k] = &runs[rng.uniform_int(runs.size())];
      }
      for (long it = 0; it < iterations; ++it) {
        for (size_t k = 0; k < K; ++k) {
          const auto& c = *picked[k];
          vals[k] = c[std::min<size_t>(static_cast<size_t>(it), c.size() - 1)];
        }
        ranks = fractional_ranks(vals);
        for (size_t k = 0; k < K; ++k) acc(static_cast<long>(k), it) += ranks[k];
      }
    }
    table.avg_rank += acc / static_cast<double>(bootstrap_size);
  }
  table.avg_rank /= static_cast<double>(n_tasks);
  return table;
}

double mann_whitney_statistic(const std::vector<double>& a,
                              const std::vector<double>& b) {
  const auto n = a.size(), m = b.size();
  if (n == 0 || m == 0) throw ValidationError("mann_whitney: empty sample");
  std::vector<double> all;
  all.reserve(n + m);
  all.insert(all.end(), a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  const auto ranks = fractional_ranks(all);
  double r_a = 0.0;
  for (size_t i = 0; i < n; ++i) r_a += ranks[i];
  return r_a - static_cast<double>(n) * (static_cast<double>(n) + 1.0) / 2.0;
}

namespace {

bool has_ties(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) != v.end();
}

}  // namespace

double mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  if (n == 0 || m == 0) throw ValidationError("mann_whitney: empty sample");
  const double u_a = mann_whitney_statistic(a, b);

  std::vector<double> all;
  all.reserve(static_cast<size_t>(n + m));
  all.insert(all.end(), a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  const bool ties = has_ties(all);

  if (static_cast<long>(n) * m <= 400 && !ties) {
    // Exact: P(U <= u_obs) from the standard counting recurrence. With the
    // largest remaining element an A it contributes j (all B's below), else
    // it is a B: count(u; i, j) = count(u - j; i - 1, j) + count(u; i, j - 1).
    const int max_u = n * m;
    std::vector<std::vector<double>> cnt(
        static_cast<size_t>(n) + 1,
        std::vector<double>(static_cast<size_t>(max_u) + 1, 0.0));
    for (int i = 0; i <= n; ++i) cnt[static_cast<size_t>(i)][0] = 1.0;
    for (int j = 1; j <= m; ++j) {
      for (int i = 1; i <= n; ++i) {
        auto& row = cnt[static_cast<size_t>(i)];
        const auto& up = cnt[static_cast<size_t>(i - 1)];
        for (int u = std::min(max_u, i * j); u >= 0; --u) {
          // largest element is an A (contributes j) or a B (contributes 0)
          const double from_a = u >= j ? up[static_cast<size_t>(u - j)] : 0.0;
          const double from_b = row[static_cast<size_t>(u)];
          row[static_cast<size_t>(u)] = from_a + from_b;
        }
      }
    }
    double total = 0.0, below = 0.0;
    const auto& dist = cnt[static_cast<size_t>(n)];
    for (int u = 0; u <= max_u; ++u) {
      total += dist[static_cast<size_t>(u)];
      if (u <= u_a + 1e-9) below += dist[static_cast<size_t>(u)];
    }
    return below / total;
  }

  // Normal approximation with tie and continuity corrections.
  const double N = n + m;
  std::vector<double> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double var = (static_cast<double>(n) * m / 12.0) *
                     ((N + 1.0) - tie_term / (N * (N - 1.0)));
  if (!(var > 0.0)) return 1.0;  // all values identical: no evidence
  const double mean_u = static_cast<double>(n) * m / 2.0;
  const double z = (u_a - mean_u + 0.5) / std::sqrt(var);
  const double p = normal_cdf(z);
  return std::max(p, 1e-300);
}

UTestMatrix pairwise_utest_matrix(const std::vector<std::string>& methods,
                                  const std::vector<std::vector<double>>& samples) {
  const auto K = methods.size();
  if (K < 2) throw ValidationError("utest matrix: need at least 2 methods");
  if (samples.size() != K)
    throw ValidationError("utest matrix: method/sample mismatch");
  UTestMatrix out;
  out.methods = methods;
  out.p = Eigen::MatrixXd::Constant(static_cast<long>(K), static_cast<long>(K),
                                    std::numeric_limits<double>::quiet_NaN());
  for (size_t row = 0; row < K; ++row)
    for (size_t col = 0; col < K; ++col) {
      if (row == col) continue;
      // "column outperforms row": column sample stochastically smaller
      out.p(static_cast<long>(row), static_cast<long>(col)) =
          mann_whitney_u(samples[col], samples[row]);
    }
  return out;
}

std::vector<double> group_means(const std::vector<double>& values, int group_size) {
  if (group_size < 1) throw ValidationError("group_means: group size must be >= 1");
  std::vector<double> out;
  const size_t n_groups = values.size() / static_cast<size_t>(group_size);
  out.reserve(n_groups);
  for (size_t g = 0; g < n_groups; ++g) {
    double acc = 0.0;
    for (int i = 0; i < group_size; ++i)
      acc += values[g * static_cast<size_t>(group_size) + static_cast<size_t>(i)];
    out.push_back(acc / group_size);
  }
  return out;
}

ScoreEstimate score_estimate(const std::string& method,
                             const std::vector<double>& per_task_values) {
  if (per_task_values.empty())
    throw ValidationError("score_estimate: no values");
  ScoreEstimate est;
  est.method = method;
  const auto n = per_task_values.size();
  est.mean = std::accumulate(per_task_values.begin(), per_task_values.end(), 0.0) /
             static_cast<double>(n);
  if (n >= 2) {
    double ss = 0.0;
    for (double v : per_task_values) ss += (v - est.mean) * (v - est.mean);
    est.se = std::sqrt(ss / static_cast<double>(n - 1)) /
             std::sqrt(static_cast<double>(n));
  }
  return est;
}

}  // namespace metabench
