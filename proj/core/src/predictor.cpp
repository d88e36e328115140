#include "justitia/predictor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace justitia {

CostRegressor::CostRegressor(TfidfVectorizer vectorizer, std::vector<double> feature_mean,
                             std::vector<double> feature_scale, Mlp mlp, double target_mean,
                             double target_scale)
    : vectorizer_(std::move(vectorizer)),
      feature_mean_(std::move(feature_mean)),
      feature_scale_(std::move(feature_scale)),
      mlp_(std::move(mlp)),
      target_mean_(target_mean),
      target_scale_(target_scale) {
  if (feature_mean_.size() != vectorizer_.dimension() ||
      feature_scale_.size() != vectorizer_.dimension() || mlp_.input_dim() != vectorizer_.dimension()) {
    throw std::invalid_argument("regressor feature dimensions disagree");
  }
}

std::vector<double> CostRegressor::features(std::string_view text) const {
  auto x = vectorizer_.transform(text);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (x[i] - feature_mean_[i]) / feature_scale_[i];
  return x;
}

double CostRegressor::predict_log(std::string_view text) const {
  return target_mean_ + target_scale_ * mlp_.forward(features(text));
}

KvCost CostRegressor::predict(std::string_view text) const {
  const double raw = std::expm1(predict_log(text));
  return KvCost(std::isfinite(raw) ? std::max(0.0, raw) : 0.0);
}

std::vector<std::size_t> layer_widths(std::size_t vocabulary, double mean_tokens) {
  const auto tokens = static_cast<std::size_t>(std::max(1.0, std::round(mean_tokens)));
  const std::size_t first = std::max<std::size_t>(1, std::min(vocabulary, tokens));
  const std::size_t second = std::max<std::size_t>(1, first / 2);
  return {std::max<std::size_t>(1, vocabulary), first, second, 32, 1};
}

CostRegressor train_cost_regressor(std::span<const TrainingSample> samples,
                                   const TrainConfig& cfg) {
  if (samples.size() < cfg.min_samples) {
    throw TrainingError("need at least " + std::to_string(cfg.min_samples) +
                        " training samples, got " + std::to_string(samples.size()));
  }
  std::vector<std::string> corpus;
  std::vector<double> targets;
  double tokens = 0.0;
  for (const auto& s : samples) {
    if (!(s.cost >= 0.0) || !std::isfinite(s.cost)) {
      throw TrainingError("training costs must be finite and non-negative");
    }
    corpus.push_back(s.text);
    targets.push_back(std::log1p(s.cost));
    tokens += static_cast<double>(TfidfVectorizer::tokenize(s.text).size());
  }
  auto vectorizer = TfidfVectorizer::fit(corpus, cfg.max_terms);
  const std::size_t dim = vectorizer.dimension();
  if (dim == 0) throw TrainingError("training corpus has no terms");

  std::vector<std::vector<double>> xs;
  xs.reserve(samples.size());
  for (const auto& doc : corpus) xs.push_back(vectorizer.transform(doc));

  const double n = static_cast<double>(samples.size());
  std::vector<double> mean(dim, 0.0);
  std::vector<double> scale(dim, 0.0);
  for (const auto& x : xs) {
    for (std::size_t i = 0; i < dim; ++i) mean[i] += x[i] / n;
  }
  for (const auto& x : xs) {
    for (std::size_t i = 0; i < dim; ++i) scale[i] += (x[i] - mean[i]) * (x[i] - mean[i]) / n;
  }
  for (double& s : scale) s = s > 1e-24 ? std::sqrt(s) : 1.0;
  for (auto& x : xs) {
    for (std::size_t i = 0; i < dim; ++i) x[i] = (x[i] - mean[i]) / scale[i];
  }

  const double t_mean = std::accumulate(targets.begin(), targets.end(), 0.0) / n;
  double t_var = 0.0;
  for (double t : targets) t_var += (t - t_mean) * (t - t_mean) / n;
  const double t_scale = t_var > 1e-24 ? std::sqrt(t_var) : 1.0;
  std::vector<double> ys;
  ys.reserve(targets.size());
  for (double t : targets) ys.push_back((t - t_mean) / t_scale);

  Mlp mlp(layer_widths(dim, tokens / n), cfg.seed, cfg.init_range);
  std::vector<DenseLayer> grad;
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(std::max(cfg.steps, 0)) + 1);
  auto& layers = mlp.layers();
  // Output starts at the target mean; the hidden layers keep their random init.
  std::fill(layers.back().weights.begin(), layers.back().weights.end(), 0.0);
  const std::size_t first_trainable = cfg.last_layer_only ? layers.size() - 1 : 0;
  for (int step = 0; step < cfg.steps; ++step) {
    const double loss = mlp.loss_and_gradient(xs, ys, cfg.l2, grad);
    if (!std::isfinite(loss)) {
      throw TrainingError("training diverged at step " + std::to_string(step));
    }
    history.push_back(loss);
    for (std::size_t l = first_trainable; l < layers.size(); ++l) {
      for (std::size_t k = 0; k < layers[l].weights.size(); ++k) {
        layers[l].weights[k] -= cfg.learning_rate * grad[l].weights[k];
      }
      for (std::size_t k = 0; k < layers[l].bias.size(); ++k) {
        layers[l].bias[k] -= cfg.learning_rate * grad[l].bias[k];
      }
    }
  }
  const double final_loss = mlp.loss(xs, ys, cfg.l2);
  if (!std::isfinite(final_loss)) throw TrainingError("training diverged");
  history.push_back(final_loss);

  CostRegressor model(std::move(vectorizer), std::move(mean), std::move(scale), std::move(mlp),
                      t_mean, t_scale);
  model.set_loss_history(std::move(history));
  return model;
}

std::string CostRegressor::to_json(std::optional<AppClass> cls) const {
  nlohmann::ordered_json j;
  j["class"] = cls ? std::string(to_string(*cls)) : std::string("GLOBAL");
  j["vocabulary"] = vectorizer_.vocabulary();
  j["idf"] = vectorizer_.idf();
  j["corpus_size"] = vectorizer_.corpus_size();
  j["feature_mean"] = feature_mean_;
  j["feature_scale"] = feature_scale_;
  j["target_mean"] = target_mean_;
  j["target_scale"] = target_scale_;
  auto layers = nlohmann::ordered_json::array();
  for (const auto& layer : mlp_.layers()) {
    nlohmann::ordered_json jl;
    jl["inputs"] = layer.inputs;
    jl["outputs"] = layer.outputs;
    jl["weights"] = layer.weights;
    jl["bias"] = layer.bias;
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);
  return j.dump();
}

CostRegressor CostRegressor::from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  auto vectorizer = TfidfVectorizer::from_parts(j.at("vocabulary").get<std::vector<std::string>>(),
                                                j.at("idf").get<std::vector<double>>(),
                                                j.at("corpus_size").get<std::size_t>());
  std::vector<DenseLayer> layers;
  for (const auto& jl : j.at("layers")) {
    DenseLayer layer;
    layer.inputs = jl.at("inputs").get<std::size_t>();
    layer.outputs = jl.at("outputs").get<std::size_t>();
    layer.weights = jl.at("weights").get<std::vector<double>>();
    layer.bias = jl.at("bias").get<std::vector<double>>();
    layers.push_back(std::move(layer));
  }
  return CostRegressor(std::move(vectorizer), j.at("feature_mean").get<std::vector<double>>(),
                       j.at("feature_scale").get<std::vector<double>>(), Mlp(std::move(layers)),
                       j.at("target_mean").get<double>(), j.at("target_scale").get<double>());
}

std::string_view to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::Oracle: return "oracle";
    case PredictorKind::PerClassMlp: return "mlp";
    case PredictorKind::GlobalMlp: return "global-mlp";
  }
  return "?";
}

std::optional<PredictorKind> parse_predictor_kind(std::string_view name) {
  for (auto kind : {PredictorKind::Oracle, PredictorKind::PerClassMlp, PredictorKind::GlobalMlp}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

KvCost Predictor::predict(const ApplicationJob& app) {
  const auto start = std::chrono::steady_clock::now();
  const KvCost cost = estimate(app);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ++stats_.calls;
  stats_.total_seconds += elapsed;
  stats_.max_seconds = std::max(stats_.max_seconds, elapsed);
  return cost;
}

KvCost OraclePredictor::estimate(const ApplicationJob& app) const {
  return application_cost(app, model_);
}

MlpPredictor::MlpPredictor(std::map<AppClass, std::shared_ptr<const CostRegressor>> per_class)
    : per_class_(std::move(per_class)) {}

MlpPredictor::MlpPredictor(std::shared_ptr<const CostRegressor> global)
    : global_(std::move(global)) {
  if (!global_) throw std::invalid_argument("global model is null");
}

std::unique_ptr<Predictor> MlpPredictor::clone() const {
  if (global_) return std::make_unique<MlpPredictor>(global_);
  return std::make_unique<MlpPredictor>(per_class_);
}

KvCost MlpPredictor::estimate(const ApplicationJob& app) const {
  if (global_) return global_->predict(app.input_text);
  auto it = per_class_.find(app.cls);
  if (it == per_class_.end()) {
    throw std::out_of_range("no trained cost model for class " + std::string(to_string(app.cls)));
  }
  return it->second->predict(app.input_text);
}

void MlpPredictor::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& json) {
    std::ofstream out(dir / (name + ".json"));
    if (!out) throw std::runtime_error("cannot write model file in " + dir.string());
    out << json << '\n';
  };
  if (global_) {
    write("GLOBAL", global_->to_json());
    return;
  }
  for (const auto& [cls, model] : per_class_) write(std::string(to_string(cls)), model->to_json(cls));
}

MlpPredictor MlpPredictor::load(const std::filesystem::path& dir) {
  auto read = [](const std::filesystem::path& file) {
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    return std::make_shared<const CostRegressor>(CostRegressor::from_json(ss.str()));
  };
  if (std::filesystem::exists(dir / "GLOBAL.json")) return MlpPredictor(read(dir / "GLOBAL.json"));
  std::map<AppClass, std::shared_ptr<const CostRegressor>> models;
  for (AppClass cls : kAllClasses) {
    const auto file = dir / (std::string(to_string(cls)) + ".json");
    if (std::filesystem::exists(file)) models.emplace(cls, read(file));
  }
  if (models.empty()) throw std::runtime_error("no model files found in " + dir.string());
  return MlpPredictor(std::move(models));
}

std::vector<TrainingSample> sample_history(AppClass cls, const ClassProfile& profile,
                                           std::size_t count, std::uint64_t seed,
                                           const CostModel& model) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(cls), 0x41u};
  std::mt19937_64 rng(seq);
  std::vector<TrainingSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const ApplicationJob app = generate_application(static_cast<AppId>(i), cls, 0.0, profile, rng);
    out.push_back(TrainingSample{app.input_text, application_cost(app, model).value});
  }
  return out;
}

std::unique_ptr<Predictor> make_predictor(PredictorKind kind, const LengthTable& lengths,
                                          const PredictorTraining& opts) {
  if (kind == PredictorKind::Oracle) return std::make_unique<OraclePredictor>(opts.cost_model);
  std::map<AppClass, std::vector<TrainingSample>> history;
  for (const auto& [cls, profile] : lengths) {
    history[cls] = sample_history(cls, profile, opts.samples_per_class, opts.seed, opts.cost_model);
  }
  if (kind == PredictorKind::GlobalMlp) {
    std::vector<TrainingSample> pooled;
    for (auto& [cls, samples] : history) pooled.insert(pooled.end(), samples.begin(), samples.end());
    return std::make_unique<MlpPredictor>(
        std::make_shared<const CostRegressor>(train_cost_regressor(pooled, opts.train)));
  }
  std::map<AppClass, std::shared_ptr<const CostRegressor>> models;
  for (auto& [cls, samples] : history) {
    models.emplace(cls, std::make_shared<const CostRegressor>(train_cost_regressor(samples, opts.train)));
  }
  return std::make_unique<MlpPredictor>(std::move(models));
}

}  // namespace justitia
