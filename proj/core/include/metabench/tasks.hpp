#pragma once

#include <memory>
#include <string>
#include <vector>

#include "metabench/meta_model.hpp"

namespace metabench {

enum class NoiseMode { noiseless, noisy };

std::string to_string(NoiseMode mode);
NoiseMode noise_mode_from_string(const std::string& s);

// A benchmark objective. Noiseless evaluation is deterministic; noisy
// evaluation draws from the caller-supplied rng so parallel runs never share
// random streams.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double evaluate(const Config& x, Rng& rng) const = 0;
  virtual double evaluate_noiseless(const Config& x) const = 0;
  virtual const ConfigSpace& space() const = 0;
  virtual std::uint64_t task_id() const = 0;
  int dimension() const { return space().dimension(); }
};

// ---------------------------------------------------------------------------
// Sampled surrogate task: f(x) = mu_hat(x, h* | theta_i), denormalized.

enum class LatentSampling {
  per_task,      // pick one training-task posterior uniformly and draw from it
  pooled_jitter  // same mixture draw plus 0.05 * average posterior std jitter
};

class SurrogateTask final : public Objective {
 public:
  Eigen::VectorXd latent;  // h*
  int theta_index = 0;
  WeightSample theta;      // embedded copy (shared in memory)
  double sigma2 = 0.0;     // homoscedastic noise variance, standardized units
  NoiseMode noise_mode = NoiseMode::noiseless;
  bool fixed_noise = false;  // strict replication mode: one eps for all calls
  double fixed_eps = 0.0;
  TargetNormalization normalization;
  NetArchitecture arch;
  std::uint64_t id = 0;
  std::uint64_t seed = 0;

  double evaluate(const Config& x, Rng& rng) const override;
  double evaluate_noiseless(const Config& x) const override;
  const ConfigSpace& space() const override { return space_; }
  std::uint64_t task_id() const override { return id; }

  void set_space(ConfigSpace s) { space_ = std::move(s); }

  // Batched noiseless evaluation over unit-cube rows; one GEMM pass per
  // layer, used for probe grids and the throughput path.
  Eigen::VectorXd evaluate_noiseless_unit_batch(const Eigen::MatrixXd& X_unit) const;

 private:
  ConfigSpace space_;
};

// Draws (task posterior, latent, weight sample) per the generative recipe;
// rng order: task index, latent vector, weight index.
SurrogateTask sample_task(const MetaModel& model, NoiseMode mode, Rng& rng,
                          LatentSampling sampling = LatentSampling::per_task);

// ---------------------------------------------------------------------------
// Analytic task family: f(x) = (a x - 2)^2 * sin(b x - 4) on [0, 1].

class ForresterTask final : public Objective {
 public:
  double a = 0.0;
  double b = 0.0;
  std::uint64_t id = 0;
  std::uint64_t seed = 0;

  ForresterTask();
  ForresterTask(double a_, double b_);

  double evaluate(const Config& x, Rng& rng) const override;
  double evaluate_noiseless(const Config& x) const override;
  const ConfigSpace& space() const override { return space_; }
  std::uint64_t task_id() const override { return id; }

 private:
  ConfigSpace space_;
};

double evaluate_forrester(const ForresterTask& task, double x);

// count i.i.d. tasks with a, b ~ U[0,1]; rng order per task: a then b.
std::vector<ForresterTask> forrester_family(int count, Rng& rng);

// ---------------------------------------------------------------------------
// Task files: {"version":1, "kind":"surrogate"|"forrester", ...}; directory
// layout tasks/NNNN.json.

nlohmann::json task_to_json(const SurrogateTask& task);
nlohmann::json task_to_json(const ForresterTask& task);
SurrogateTask surrogate_task_from_json(const nlohmann::json& j);
ForresterTask forrester_task_from_json(const nlohmann::json& j);

void save_task(const SurrogateTask& task, const std::string& path);
void save_task(const ForresterTask& task, const std::string& path);
std::unique_ptr<Objective> load_task(const std::string& path);

// Sorted NNNN.json task files of a directory.
std::vector<std::unique_ptr<Objective>> load_task_dir(const std::string& dir);
std::string task_file_name(std::uint64_t index);

}  // namespace metabench
