#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metabench/assessment.hpp"
#include "metabench/optimizers.hpp"

namespace metabench {

// ---------------------------------------------------------------------------
// Experiment plan

struct ExperimentPlan {
  std::string task_source;
  std::vector<Method> methods;
  int runs_per_task = 20;
  // 0 entries fall back to default_budget(method); `budget` overrides all.
  std::map<std::string, int> budget_by_method;
  int budget = 0;
  bool fast = false;  // shrink BNN-BO MCMC budget 10x
  std::uint64_t master_seed = 0;

  int budget_of(Method m) const;
  void validate() const;
};

nlohmann::json plan_to_json(const ExperimentPlan& plan);
ExperimentPlan plan_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Results archive: a directory holding plan.json and one append-only JSONL
// file per method under results/. Lines appear in canonical (task, run)
// order so reruns of an identical plan produce identical archives modulo
// wall-clock fields.

struct RunRecordLine {
  std::string method;
  std::uint64_t task_id = 0;
  int run = 0;
  std::uint64_t seed = 0;
  std::string status;  // "ok" or "error"
  std::string error;
  double wall_ms = 0.0;
  std::vector<Config> xs;
  std::vector<double> ys;
};

struct BenchOutcome {
  long completed = 0;
  long skipped = 0;   // already present in the archive
  long failed = 0;
};

// Executes the (method x task x run) grid on a bounded worker pool. Each
// cell's rng seed is derive_seed(master, tag, task_id, run). Existing cells
// in the archive are skipped, making interrupted runs resumable.
BenchOutcome run_benchmark(const ExperimentPlan& plan,
                           const std::vector<const Objective*>& tasks,
                           const std::string& archive_dir, int workers = 0,
                           bool quiet = false);

// Worker count: METABENCH_WORKERS env var, else hardware concurrency.
int default_worker_count();

std::vector<RunRecordLine> load_method_records(const std::string& archive_dir,
                                               const std::string& method_tag);
ExperimentPlan load_plan(const std::string& archive_dir);

// Re-evaluates the first configuration of each noiseless-task trajectory and
// checks it matches the recorded value exactly. Returns the number of
// mismatches (0 = archive validates).
long verify_archive(const std::string& archive_dir,
                    const std::vector<const Objective*>& tasks);

// ---------------------------------------------------------------------------
// Reports

struct ReportOptions {
  bool ecdf = false;
  bool ranks = false;
  bool utest = false;
  bool scores = false;
  int group_size = 20;
  int bootstrap_size = 1000;
  std::uint64_t seed = 0;
  // 11 evenly spaced quantiles when enabled; empty = full probe grid.
  bool target_quantiles = false;
  std::string tasks_dir;  // needed for --ecdf (probe-grid targets)
};

// Writes ecdf.csv / ranks.csv / utest.csv / scores.csv into out_dir.
void generate_reports(const std::string& archive_dir, const ReportOptions& options,
                      const std::string& out_dir);

// Group-of-`group_size` mean final errors per method, pooled over tasks;
// the protocol behind the pairwise significance matrix.
std::vector<std::vector<double>> final_error_groups(
    const std::vector<std::string>& methods,
    const std::vector<std::vector<std::vector<double>>>& finals_per_method_task,
    int group_size);

}  // namespace metabench
