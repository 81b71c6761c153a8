#include "metabench/meta_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace metabench {

using nlohmann::json;

MetaModel train_meta_model(const EvaluationDataset& dataset,
                           const EncoderModel& encoder,
                           const MetaModelConfig& config) {
  dataset.validate();
  const int T = dataset.num_tasks();
  const int N = dataset.num_points();
  if (encoder.num_tasks() != T)
    throw ValidationError("train_meta_model: encoder was trained on " +
                          std::to_string(encoder.num_tasks()) +
                          " tasks, dataset has " + std::to_string(T));
  const int Q = encoder.latent_dim();
  const int D = dataset.space.dimension();

  auto [Ystd, norm] = normalize_targets(dataset.targets);
  const Eigen::MatrixXd Xunit = normalize_inputs(dataset.space, dataset.grid);

  NetArchitecture arch;
  arch.input_dim = D + Q;
  arch.hidden = config.hidden;
  const int P = arch.num_params();

  // Flatten (task, grid point) pairs.
  const long n_data = static_cast<long>(T) * N;
  Eigen::MatrixXd Xrows(n_data, D);
  Eigen::VectorXd yflat(n_data);
  std::vector<int> task_of(static_cast<size_t>(n_data));
  for (int t = 0; t < T; ++t)
    for (int n = 0; n < N; ++n) {
      const long r = static_cast<long>(t) * N + n;
      Xrows.row(r) = Xunit.row(n);
      yflat[r] = Ystd(t, n);
      task_of[static_cast<size_t>(r)] = t;
    }

  SghmcConfig scfg = config.sghmc;
  scfg.validate();
  scfg.grad_scale = static_cast<double>(n_data);
  const int H = scfg.latent_draws;
  const int B = std::min<long>(scfg.minibatch, n_data);
  const long steps_per_epoch = (n_data + B - 1) / B;

  Rng init_rng(splitmix64(config.seed ^ 0x6d657461ULL));
  Rng chain_rng(splitmix64(config.seed ^ 0x7368676dULL));
  Rng epoch_rng(splitmix64(config.seed ^ 0x65706f63ULL));

  // Weight init: small random weights; rho starts at softplus^-1(0.1^2)-ish
  // so the initial noise estimate is moderate.
  Eigen::VectorXd theta0(P);
  init_rng.fill_normal(theta0.data(), static_cast<size_t>(P));
  theta0 *= 0.05;
  theta0[P - 1] = -2.0;

  MlpWorkspace<double> ws(arch);
  std::vector<Eigen::MatrixXd> draws(static_cast<size_t>(T));
  std::vector<long> order(static_cast<size_t>(n_data));
  std::iota(order.begin(), order.end(), 0L);
  long epoch_of_last = -1;

  Eigen::MatrixXd Xbatch(static_cast<long>(B) * H, D + Q);
  Eigen::VectorXd mu, dmu(static_cast<long>(B) * H);

  auto grad_fn = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad,
                     long step) {
    const long epoch = step / steps_per_epoch;
    if (epoch != epoch_of_last) {
      // Fresh latent draws and data order every epoch.
      for (int t = 0; t < T; ++t) {
        auto& d = draws[static_cast<size_t>(t)];
        d.resize(H, Q);
        for (int j = 0; j < H; ++j)
          d.row(j) = sample_latent(encoder.posteriors[static_cast<size_t>(t)],
                                   epoch_rng)
                         .transpose();
      }
      for (long i = n_data - 1; i > 0; --i)
        std::swap(order[static_cast<size_t>(i)],
                  order[static_cast<size_t>(epoch_rng.uniform_int(
                      static_cast<std::uint64_t>(i + 1)))]);
      epoch_of_last = epoch;
    }
    const long pos = (step % steps_per_epoch) * B;
    const long bsz = std::min<long>(B, n_data - pos);

    for (long k = 0; k < bsz; ++k) {
      const long r = order[static_cast<size_t>(pos + k)];
      const auto& d = draws[static_cast<size_t>(task_of[static_cast<size_t>(r)])];
      for (int j = 0; j < H; ++j)
        Xbatch.row(k * H + j) << Xrows.row(r), d.row(j);
    }
    const auto Xview = Xbatch.topRows(bsz * H);
    ws.forward(theta, Xview, mu);

    const double rho = theta[P - 1];
    const double sigma2 = softplus(rho);
    const double scale = static_cast<double>(n_data) / static_cast<double>(bsz);
    const double invH = 1.0 / H;

    grad.setZero(P);
    double drho = 0.0;
    for (long k = 0; k < bsz; ++k) {
      const double yn = yflat[order[static_cast<size_t>(pos + k)]];
      for (int j = 0; j < H; ++j) {
        const double resid = yn - mu[k * H + j];
        // d(-log p)/dmu, scaled to a full-data estimate
        dmu[k * H + j] = -scale * invH * resid / sigma2;
        drho += -scale * invH *
                (-0.5 / sigma2 + resid * resid / (2.0 * sigma2 * sigma2));
      }
    }
    ws.backward(theta, Xview, dmu.head(bsz * H), grad);
    grad[P - 1] += drho * sigmoid(rho);
    grad += theta / scfg.prior_var;  // Gaussian prior on all parameters
  };

  auto samples = sghmc_sample<double>(grad_fn, theta0, scfg, chain_rng);

  MetaModel model;
  model.arch = arch;
  model.weights.reserve(samples.size());
  for (auto& s : samples)
    model.weights.push_back(std::make_shared<const Eigen::VectorXd>(std::move(s)));
  model.encoder = encoder;
  model.normalization = norm;
  model.space = dataset.space;
  model.train_seed = config.seed;
  return model;
}

Prediction predict_standardized(const MetaModel& model,
                                const Eigen::VectorXd& x_unit,
                                const Eigen::VectorXd& h) {
  const int M = model.ensemble_size();
  if (M < 1) throw ValidationError("predict: model has no weight samples");
  Eigen::VectorXd input(model.arch.input_dim);
  input << x_unit, h;

  Eigen::VectorXd mus(M), sig2(M);
  for (int i = 0; i < M; ++i) {
    const auto& th = *model.weights[static_cast<size_t>(i)];
    mus[i] = mlp_forward_mu(model.arch, th.data(), input);
    sig2[i] = softplus(th[th.size() - 1]);
  }
  const double mu = mus.mean();
  const double var = ((mus.array() - mu).square() + sig2.array()).mean();
  return {mu, var};
}

Prediction predict(const MetaModel& model, const Config& x,
                   const Eigen::VectorXd& h) {
  model.space.validate(x);
  const Prediction p = predict_standardized(model, model.space.to_unit(x), h);
  const double s = model.normalization.stddev;
  return {model.normalization.denormalize(p.mean), p.var * s * s};
}

// ---------------------------------------------------------------------------
// Model container

namespace {

json encoder_to_json(const EncoderModel& e) {
  json posts = json::array();
  for (const auto& p : e.posteriors) {
    posts.push_back(
        {{"mean", std::vector<double>(p.mean.begin(), p.mean.end())},
         {"var", std::vector<double>(p.var.begin(), p.var.end())}});
  }
  json inducing = json::array();
  for (Eigen::Index i = 0; i < e.inducing.rows(); ++i)
    inducing.push_back(std::vector<double>(e.inducing.row(i).begin(),
                                           e.inducing.row(i).end()));
  return json{
      {"latent_dim", e.latent_dim()},
      {"posteriors", posts},
      {"lengthscales",
       std::vector<double>(e.lengthscales.begin(), e.lengthscales.end())},
      {"signal_var", e.signal_var},
      {"noise_var", e.noise_var},
      {"inducing", inducing},
      {"bound", e.bound}};
}

const json& require(const json& j, const char* field, const char* ctx) {
  auto it = j.find(field);
  if (it == j.end())
    throw SchemaError(std::string(ctx) + ": missing field \"" + field + "\"");
  return *it;
}

EncoderModel encoder_from_json(const json& j) {
  EncoderModel e;
  const int Q = require(j, "latent_dim", "encoder").get<int>();
  e.config.latent_dim = Q;
  for (const auto& pj : require(j, "posteriors", "encoder")) {
    TaskPosterior p;
    auto mean = require(pj, "mean", "posterior").get<std::vector<double>>();
    auto var = require(pj, "var", "posterior").get<std::vector<double>>();
    p.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<long>(mean.size()));
    p.var = Eigen::Map<Eigen::VectorXd>(var.data(), static_cast<long>(var.size()));
    e.posteriors.push_back(std::move(p));
  }
  auto ls = require(j, "lengthscales", "encoder").get<std::vector<double>>();
  e.lengthscales = Eigen::Map<Eigen::VectorXd>(ls.data(), static_cast<long>(ls.size()));
  e.signal_var = require(j, "signal_var", "encoder").get<double>();
  e.noise_var = require(j, "noise_var", "encoder").get<double>();
  const auto& ind = require(j, "inducing", "encoder");
  e.inducing.resize(static_cast<long>(ind.size()), Q);
  for (Eigen::Index i = 0; i < e.inducing.rows(); ++i) {
    auto row = ind[static_cast<size_t>(i)].get<std::vector<double>>();
    e.inducing.row(i) =
        Eigen::Map<Eigen::VectorXd>(row.data(), static_cast<long>(row.size())).transpose();
  }
  e.bound = require(j, "bound", "encoder").get<double>();
  return e;
}

}  // namespace

json model_to_json(const MetaModel& model) {
  json weights = json::array();
  for (const auto& w : model.weights)
    weights.push_back(encode_f64(std::vector<double>(w->begin(), w->end())));
  return json{{"version", 1},
              {"kind", "metabench-model"},
              {"space", space_to_json(model.space)},
              {"architecture",
               {{"input_dim", model.arch.input_dim}, {"hidden", model.arch.hidden}}},
              {"normalization",
               {{"y_mean", model.normalization.mean},
                {"y_std", model.normalization.stddev}}},
              {"encoder", encoder_to_json(model.encoder)},
              {"weights", weights},
              {"train_seed", model.train_seed}};
}

MetaModel model_from_json(const json& j) {
  if (require(j, "version", "model").get<int>() != 1)
    throw SchemaError("model: unsupported version " +
                      require(j, "version", "model").dump());
  if (require(j, "kind", "model").get<std::string>() != "metabench-model")
    throw SchemaError("model: unexpected kind");
  MetaModel m;
  m.space = space_from_json(require(j, "space", "model"));
  const auto& aj = require(j, "architecture", "model");
  m.arch.input_dim = require(aj, "input_dim", "architecture").get<int>();
  m.arch.hidden = require(aj, "hidden", "architecture").get<std::vector<int>>();
  const auto& nj = require(j, "normalization", "model");
  m.normalization.mean = require(nj, "y_mean", "normalization").get<double>();
  m.normalization.stddev = require(nj, "y_std", "normalization").get<double>();
  m.encoder = encoder_from_json(require(j, "encoder", "model"));
  const int P = m.arch.num_params();
  for (const auto& wj : require(j, "weights", "model")) {
    auto w = decode_f64(wj.get<std::string>());
    if (static_cast<int>(w.size()) != P)
      throw SchemaError("model: weight sample has " + std::to_string(w.size()) +
                        " values, architecture needs " + std::to_string(P));
    m.weights.push_back(std::make_shared<const Eigen::VectorXd>(
        Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<long>(w.size()))));
  }
  if (m.weights.empty()) throw SchemaError("model: no weight samples");
  m.train_seed = require(j, "train_seed", "model").get<std::uint64_t>();
  return m;
}

void save_model(const MetaModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write model file: " + path);
  out << model_to_json(model).dump() << "\n";
}

MetaModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("model: invalid JSON in " + path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace metabench
