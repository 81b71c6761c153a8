#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "metabench/config_space.hpp"

namespace metabench {

// Offline task-evaluation data: T tasks observed on a shared grid of N
// configurations. Rows of `targets` are tasks, columns follow `grid`.
struct EvaluationDataset {
  ConfigSpace space;
  std::vector<Config> grid;
  Eigen::MatrixXd targets;  // T x N
  std::vector<std::string> task_names;

  int num_tasks() const { return static_cast<int>(targets.rows()); }
  int num_points() const { return static_cast<int>(targets.cols()); }

  // Shape consistency, finite targets, distinct grid entries.
  void validate() const;
};

// Global target standardization (shared across tasks so cross-task
// correlation survives).
struct TargetNormalization {
  double mean = 0.0;
  double stddev = 1.0;

  double normalize(double y) const { return (y - mean) / stddev; }
  double denormalize(double z) const { return mean + stddev * z; }
};

// Standardizes all T*N entries to zero mean / unit variance (population
// variance). Throws ValidationError on fewer than two entries or zero
// variance.
std::pair<Eigen::MatrixXd, TargetNormalization> normalize_targets(
    const Eigen::MatrixXd& targets);

// JSON schema:
//   {"space": {"dims": [{"name","lower","upper","log"}]},
//    "grid": [[...], ...], "task_names": [...], "targets": [[...], ...]}
nlohmann::json space_to_json(const ConfigSpace& space);
ConfigSpace space_from_json(const nlohmann::json& j);

nlohmann::json dataset_to_json(const EvaluationDataset& ds);
EvaluationDataset dataset_from_json(const nlohmann::json& j);

EvaluationDataset load_dataset(const std::string& path);
void save_dataset(const EvaluationDataset& ds, const std::string& path);

}  // namespace metabench
