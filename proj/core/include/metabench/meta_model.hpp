#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "metabench/dataset.hpp"
#include "metabench/gplvm.hpp"
#include "metabench/mlp.hpp"
#include "metabench/sghmc.hpp"

namespace metabench {

// Trained generative model: posterior weight samples of the multi-task net
// plus the encoder and the normalization needed to map predictions back to
// raw target units. Immutable once trained; safe to share across threads.
using WeightSample = std::shared_ptr<const Eigen::VectorXd>;

struct MetaModel {
  NetArchitecture arch;               // input_dim = D + Q
  std::vector<WeightSample> weights;  // M flat samples (incl. rho)
  EncoderModel encoder;
  TargetNormalization normalization;
  ConfigSpace space;
  std::uint64_t train_seed = 0;

  int ensemble_size() const { return static_cast<int>(weights.size()); }
  int latent_dim() const { return encoder.latent_dim(); }
};

struct MetaModelConfig {
  std::vector<int> hidden = {500, 500, 500};
  SghmcConfig sghmc;  // step 1e-2, burn_in 50000, M=100, keep_every=100, H=10
  std::uint64_t seed = 0;
};

// Runs SGHMC over the multi-task log posterior, drawing H latent samples per
// task from the encoder posteriors each epoch. Deterministic per seed.
MetaModel train_meta_model(const EvaluationDataset& dataset,
                           const EncoderModel& encoder,
                           const MetaModelConfig& config);

// Ensemble predictive at a configuration and latent vector, in raw target
// units:  mu = mean_i mu_i ;  var = mean_i [ (mu_i - mu)^2 + sigma2_i ].
struct Prediction {
  double mean;
  double var;
};
Prediction predict(const MetaModel& model, const Config& x,
                   const Eigen::VectorXd& h);

// Prediction in standardized units given a precomputed unit-cube input.
Prediction predict_standardized(const MetaModel& model,
                                const Eigen::VectorXd& x_unit,
                                const Eigen::VectorXd& h);

// Model container (JSON, weight blocks as base64 little-endian float64).
nlohmann::json model_to_json(const MetaModel& model);
MetaModel model_from_json(const nlohmann::json& j);
void save_model(const MetaModel& model, const std::string& path);
MetaModel load_model(const std::string& path);

}  // namespace metabench
