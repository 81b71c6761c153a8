#include "metabench/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace metabench {

using nlohmann::json;

std::string to_string(NoiseMode mode) {
  return mode == NoiseMode::noiseless ? "noiseless" : "noisy";
}

NoiseMode noise_mode_from_string(const std::string& s) {
  if (s == "noiseless") return NoiseMode::noiseless;
  if (s == "noisy") return NoiseMode::noisy;
  throw SchemaError("unknown noise mode \"" + s + "\"");
}

// ---------------------------------------------------------------------------
// SurrogateTask

double SurrogateTask::evaluate_noiseless(const Config& x) const {
  const Eigen::VectorXd u = space_.to_unit(x);
  Eigen::VectorXd input(arch.input_dim);
  input << u, latent;
  const double mu = mlp_forward_mu(arch, theta->data(), input);
  return normalization.denormalize(mu);
}

double SurrogateTask::evaluate(const Config& x, Rng& rng) const {
  if (noise_mode == NoiseMode::noiseless) return evaluate_noiseless(x);
  const Eigen::VectorXd u = space_.to_unit(x);
  Eigen::VectorXd input(arch.input_dim);
  input << u, latent;
  const double mu = mlp_forward_mu(arch, theta->data(), input);
  const double eps = fixed_noise ? fixed_eps : rng.normal();
  return normalization.denormalize(mu + eps * std::sqrt(sigma2));
}

Eigen::VectorXd SurrogateTask::evaluate_noiseless_unit_batch(
    const Eigen::MatrixXd& X_unit) const {
  const auto R = X_unit.rows();
  Eigen::MatrixXd input(R, arch.input_dim);
  input << X_unit, latent.transpose().replicate(R, 1);
  Eigen::VectorXd mu = mlp_forward_batch(arch, theta->data(), input);
  for (Eigen::Index i = 0; i < R; ++i) mu[i] = normalization.denormalize(mu[i]);
  return mu;
}

SurrogateTask sample_task(const MetaModel& model, NoiseMode mode, Rng& rng,
                          LatentSampling sampling) {
  if (model.ensemble_size() < 1)
    throw ValidationError("sample_task: model has no weight samples");
  if (model.encoder.posteriors.empty())
    throw ValidationError("sample_task: model has no task posteriors");

  SurrogateTask task;
  const auto t = rng.uniform_int(model.encoder.posteriors.size());
  task.latent = sample_latent(model.encoder.posteriors[t], rng);
  if (sampling == LatentSampling::pooled_jitter) {
    double avg_std = 0.0;
    for (const auto& p : model.encoder.posteriors)
      avg_std += p.var.array().sqrt().mean();
    avg_std /= static_cast<double>(model.encoder.posteriors.size());
    for (Eigen::Index q = 0; q < task.latent.size(); ++q)
      task.latent[q] += 0.05 * avg_std * rng.normal();
  }
  task.theta_index = static_cast<int>(rng.uniform_int(
      static_cast<std::uint64_t>(model.ensemble_size())));
  task.theta = model.weights[static_cast<size_t>(task.theta_index)];
  task.sigma2 = softplus((*task.theta)[task.theta->size() - 1]);
  task.noise_mode = mode;
  task.normalization = model.normalization;
  task.arch = model.arch;
  task.set_space(model.space);
  return task;
}

// ---------------------------------------------------------------------------
// ForresterTask

namespace {
ConfigSpace forrester_space() {
  return ConfigSpace({Dimension{"x", 0.0, 1.0, false}});
}
}  // namespace

ForresterTask::ForresterTask() : space_(forrester_space()) {}
ForresterTask::ForresterTask(double a_, double b_)
    : a(a_), b(b_), space_(forrester_space()) {}

double evaluate_forrester(const ForresterTask& task, double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw ValidationError("forrester: x = " + std::to_string(x) +
                          " outside [0, 1]");
  const double g = task.a * x - 2.0;
  return g * g * std::sin(task.b * x - 4.0);
}

double ForresterTask::evaluate_noiseless(const Config& x) const {
  space_.validate(x);
  return evaluate_forrester(*this, x[0]);
}

double ForresterTask::evaluate(const Config& x, Rng&) const {
  return evaluate_noiseless(x);
}

std::vector<ForresterTask> forrester_family(int count, Rng& rng) {
  if (count < 1) throw ValidationError("forrester_family: count must be >= 1");
  std::vector<ForresterTask> tasks;
  tasks.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    ForresterTask t(rng.u01(), rng.u01());
    t.id = static_cast<std::uint64_t>(i);
    tasks.push_back(std::move(t));
  }
  return tasks;
}

// ---------------------------------------------------------------------------
// Task files

json task_to_json(const SurrogateTask& task) {
  return json{{"version", 1},
              {"kind", "surrogate"},
              {"task_id", task.id},
              {"seed", task.seed},
              {"noise_mode", to_string(task.noise_mode)},
              {"fixed_noise", task.fixed_noise},
              {"fixed_eps", task.fixed_eps},
              {"latent", std::vector<double>(task.latent.begin(), task.latent.end())},
              {"theta_index", task.theta_index},
              {"theta", encode_f64(std::vector<double>(task.theta->begin(),
                                                       task.theta->end()))},
              {"sigma2", task.sigma2},
              {"space", space_to_json(task.space())},
              {"normalization",
               {{"y_mean", task.normalization.mean},
                {"y_std", task.normalization.stddev}}},
              {"architecture",
               {{"input_dim", task.arch.input_dim}, {"hidden", task.arch.hidden}}}};
}

json task_to_json(const ForresterTask& task) {
  return json{{"version", 1},
              {"kind", "forrester"},
              {"task_id", task.id},
              {"seed", task.seed},
              {"a", task.a},
              {"b", task.b}};
}

namespace {
const json& require(const json& j, const char* field, const char* ctx) {
  auto it = j.find(field);
  if (it == j.end())
    throw SchemaError(std::string(ctx) + ": missing field \"" + field + "\"");
  return *it;
}

void check_version(const json& j, const char* ctx) {
  const int v = require(j, "version", ctx).get<int>();
  if (v != 1)
    throw SchemaError(std::string(ctx) + ": unsupported version " +
                      std::to_string(v));
}
}  // namespace

SurrogateTask surrogate_task_from_json(const json& j) {
  check_version(j, "task");
  if (require(j, "kind", "task").get<std::string>() != "surrogate")
    throw SchemaError("task: expected kind \"surrogate\"");
  SurrogateTask t;
  t.id = require(j, "task_id", "task").get<std::uint64_t>();
  t.seed = require(j, "seed", "task").get<std::uint64_t>();
  t.noise_mode =
      noise_mode_from_string(require(j, "noise_mode", "task").get<std::string>());
  t.fixed_noise = require(j, "fixed_noise", "task").get<bool>();
  t.fixed_eps = require(j, "fixed_eps", "task").get<double>();
  auto latent = require(j, "latent", "task").get<std::vector<double>>();
  t.latent = Eigen::Map<Eigen::VectorXd>(latent.data(), static_cast<long>(latent.size()));
  t.theta_index = require(j, "theta_index", "task").get<int>();
  auto theta = decode_f64(require(j, "theta", "task").get<std::string>());
  t.theta = std::make_shared<const Eigen::VectorXd>(
      Eigen::Map<Eigen::VectorXd>(theta.data(), static_cast<long>(theta.size())));
  t.sigma2 = require(j, "sigma2", "task").get<double>();
  t.set_space(space_from_json(require(j, "space", "task")));
  const auto& nj = require(j, "normalization", "task");
  t.normalization.mean = require(nj, "y_mean", "normalization").get<double>();
  t.normalization.stddev = require(nj, "y_std", "normalization").get<double>();
  const auto& aj = require(j, "architecture", "task");
  t.arch.input_dim = require(aj, "input_dim", "architecture").get<int>();
  t.arch.hidden = require(aj, "hidden", "architecture").get<std::vector<int>>();
  if (t.arch.num_params() != static_cast<int>(t.theta->size()))
    throw SchemaError("task: theta length " + std::to_string(t.theta->size()) +
                      " does not match architecture (" +
                      std::to_string(t.arch.num_params()) + " params)");
  if (t.arch.input_dim != t.space().dimension() + static_cast<int>(t.latent.size()))
    throw SchemaError("task: architecture input_dim != D + Q");
  return t;
}

ForresterTask forrester_task_from_json(const json& j) {
  check_version(j, "task");
  if (require(j, "kind", "task").get<std::string>() != "forrester")
    throw SchemaError("task: expected kind \"forrester\"");
  ForresterTask t(require(j, "a", "task").get<double>(),
                  require(j, "b", "task").get<double>());
  if (!(t.a >= 0 && t.a <= 1 && t.b >= 0 && t.b <= 1))
    throw SchemaError("task: forrester parameters outside [0, 1]");
  t.id = require(j, "task_id", "task").get<std::uint64_t>();
  t.seed = require(j, "seed", "task").get<std::uint64_t>();
  return t;
}

namespace {
json read_task_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open task file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("task: corrupt or truncated file " + path + ": " + e.what());
  }
  return j;
}
}  // namespace

void save_task(const SurrogateTask& task, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write task file: " + path);
  out << task_to_json(task).dump() << "\n";
}

void save_task(const ForresterTask& task, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write task file: " + path);
  out << task_to_json(task).dump() << "\n";
}

std::unique_ptr<Objective> load_task(const std::string& path) {
  const json j = read_task_json(path);
  const std::string kind = require(j, "kind", "task").get<std::string>();
  if (kind == "surrogate")
    return std::make_unique<SurrogateTask>(surrogate_task_from_json(j));
  if (kind == "forrester")
    return std::make_unique<ForresterTask>(forrester_task_from_json(j));
  throw SchemaError("task: unknown kind \"" + kind + "\"");
}

std::string task_file_name(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04llu.json",
                static_cast<unsigned long long>(index));
  return buf;
}

std::vector<std::unique_ptr<Objective>> load_task_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw SchemaError("not a task directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw SchemaError("task directory is empty: " + dir);
  std::vector<std::unique_ptr<Objective>> tasks;
  tasks.reserve(files.size());
  for (const auto& f : files) tasks.push_back(load_task(f.string()));
  return tasks;
}

}  // namespace metabench
