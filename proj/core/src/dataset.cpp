#include "metabench/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace metabench {

using nlohmann::json;

void EvaluationDataset::validate() const {
  const auto T = targets.rows();
  const auto N = targets.cols();
  if (T < 1 || N < 1) throw ValidationError("dataset: empty target matrix");
  if (static_cast<Eigen::Index>(grid.size()) != N)
    throw ValidationError("dataset: targets has " + std::to_string(N) +
                          " columns but grid has " + std::to_string(grid.size()) +
                          " configs");
  if (static_cast<Eigen::Index>(task_names.size()) != T)
    throw ValidationError("dataset: targets has " + std::to_string(T) +
                          " rows but task_names has " +
                          std::to_string(task_names.size()) + " entries");
  if (!targets.allFinite()) throw ValidationError("dataset: non-finite target value");
  for (const auto& x : grid) space.validate(x);

  std::set<std::vector<double>> seen;
  for (const auto& x : grid) {
    std::vector<double> key(x.data(), x.data() + x.size());
    if (!seen.insert(std::move(key)).second)
      throw ValidationError("dataset: duplicate grid entry");
  }
}

std::pair<Eigen::MatrixXd, TargetNormalization> normalize_targets(
    const Eigen::MatrixXd& targets) {
  const auto n = targets.size();
  if (n < 2) throw ValidationError("target normalization needs at least 2 values");
  TargetNormalization norm;
  norm.mean = targets.mean();
  const double var = (targets.array() - norm.mean).square().sum() / static_cast<double>(n);
  if (!(var > 0.0))
    throw ValidationError("target normalization: zero variance (all targets equal)");
  norm.stddev = std::sqrt(var);
  Eigen::MatrixXd out = (targets.array() - norm.mean) / norm.stddev;
  return {std::move(out), norm};
}

json space_to_json(const ConfigSpace& space) {
  json dims = json::array();
  for (const auto& d : space.dims()) {
    dims.push_back({{"name", d.name},
                    {"lower", d.lower},
                    {"upper", d.upper},
                    {"log", d.log_scale}});
  }
  return json{{"dims", dims}};
}

namespace {
const json& require(const json& j, const char* field, const char* ctx) {
  auto it = j.find(field);
  if (it == j.end())
    throw SchemaError(std::string(ctx) + ": missing field \"" + field + "\"");
  return *it;
}
}  // namespace

ConfigSpace space_from_json(const json& j) {
  const json& dims = require(j, "dims", "space");
  if (!dims.is_array() || dims.empty())
    throw SchemaError("space: \"dims\" must be a non-empty array");
  std::vector<Dimension> out;
  for (const auto& dj : dims) {
    Dimension d;
    d.name = require(dj, "name", "space.dims").get<std::string>();
    d.lower = require(dj, "lower", "space.dims").get<double>();
    d.upper = require(dj, "upper", "space.dims").get<double>();
    d.log_scale = require(dj, "log", "space.dims").get<bool>();
    out.push_back(std::move(d));
  }
  try {
    return ConfigSpace(std::move(out));
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("space: ") + e.what());
  }
}

json dataset_to_json(const EvaluationDataset& ds) {
  json grid = json::array();
  for (const auto& x : ds.grid)
    grid.push_back(std::vector<double>(x.data(), x.data() + x.size()));
  json targets = json::array();
  for (Eigen::Index t = 0; t < ds.targets.rows(); ++t) {
    targets.push_back(std::vector<double>(ds.targets.row(t).begin(),
                                          ds.targets.row(t).end()));
  }
  return json{{"space", space_to_json(ds.space)},
              {"grid", grid},
              {"task_names", ds.task_names},
              {"targets", targets}};
}

EvaluationDataset dataset_from_json(const json& j) {
  EvaluationDataset ds;
  ds.space = space_from_json(require(j, "space", "dataset"));
  const json& grid = require(j, "grid", "dataset");
  if (!grid.is_array() || grid.empty())
    throw SchemaError("dataset: \"grid\" must be a non-empty array");
  const int D = ds.space.dimension();
  for (const auto& row : grid) {
    auto vals = row.get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != D)
      throw SchemaError("dataset: grid entry has " + std::to_string(vals.size()) +
                        " values, space has " + std::to_string(D) + " dimensions");
    ds.grid.push_back(Eigen::Map<Config>(vals.data(), D));
  }
  ds.task_names = require(j, "task_names", "dataset").get<std::vector<std::string>>();
  const json& targets = require(j, "targets", "dataset");
  if (!targets.is_array() || targets.empty())
    throw SchemaError("dataset: \"targets\" must be a non-empty array");
  const auto T = static_cast<Eigen::Index>(targets.size());
  const auto N = static_cast<Eigen::Index>(ds.grid.size());
  ds.targets.resize(T, N);
  for (Eigen::Index t = 0; t < T; ++t) {
    auto row = targets[static_cast<size_t>(t)].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != N)
      throw SchemaError("dataset: targets row " + std::to_string(t) + " has " +
                        std::to_string(row.size()) + " entries, grid has " +
                        std::to_string(N));
    ds.targets.row(t) = Eigen::Map<Eigen::VectorXd>(row.data(), N).transpose();
  }
  try {
    ds.validate();
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("dataset: ") + e.what());
  }
  return ds;
}

EvaluationDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open dataset file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("dataset: invalid JSON in " + path + ": " + e.what());
  }
  return dataset_from_json(j);
}

void save_dataset(const EvaluationDataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write dataset file: " + path);
  out << dataset_to_json(ds).dump(2) << "\n";
}

}  // namespace metabench
