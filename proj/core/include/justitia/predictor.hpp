#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "justitia/cost_model.hpp"
#include "justitia/types.hpp"
#include "justitia/workload.hpp"

namespace justitia {

// Term weighting: tf = raw count / document length,
// idf(t) = ln(N / (1 + df(t))) + 1, output vectors are L2-normalized.
class TfidfVectorizer {
 public:
  // Keeps the `max_terms` terms with the highest document frequency (ties by
  // term). Throws std::invalid_argument on an empty corpus.
  static TfidfVectorizer fit(std::span<const std::string> corpus, std::size_t max_terms = 4096);
  static TfidfVectorizer from_parts(std::vector<std::string> vocabulary, std::vector<double> idf,
                                    std::size_t corpus_size);

  // Lowercased whitespace/punctuation-separated tokens.
  static std::vector<std::string> tokenize(std::string_view text);
  static std::map<std::string, double> term_frequencies(std::string_view doc);

  std::vector<double> transform(std::string_view doc) const;

  std::size_t dimension() const { return vocabulary_.size(); }
  std::size_t corpus_size() const { return corpus_size_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& idf() const { return idf_; }
  std::optional<double> idf_of(std::string_view term) const;

 private:
  std::vector<std::string> vocabulary_;  // sorted
  std::vector<double> idf_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t corpus_size_ = 0;
};

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  // outputs x inputs, row-major
  std::vector<double> bias;
};

// Feed-forward net: ReLU on hidden layers, identity on the scalar output.
class Mlp {
 public:
  // widths = {input, hidden..., 1}; weights ~ uniform(-r, r) with r =
  // init_range, or the Glorot range sqrt(6 / (in + out)) when init_range <= 0.
  Mlp(const std::vector<std::size_t>& widths, std::uint64_t seed, double init_range);
  explicit Mlp(std::vector<DenseLayer> layers);

  double forward(std::span<const double> x) const;

  // mean (f(x) - y)^2 + l2 * sum of squared weights (biases excluded).
  double loss(std::span<const std::vector<double>> xs, std::span<const double> ys, double l2) const;
  // Same loss; `grad` receives d loss / d parameter with the layer layout.
  double loss_and_gradient(std::span<const std::vector<double>> xs, std::span<const double> ys,
                           double l2, std::vector<DenseLayer>& grad) const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  std::size_t input_dim() const { return layers_.front().inputs; }

 private:
  std::vector<DenseLayer> layers_;
};

struct TrainConfig {
  double learning_rate = 0.01;
  int steps = 500;
  double l2 = 1e-4;
  double init_range = 0.0;  // <= 0 selects the Glorot range
  std::uint64_t seed = 1;
  std::size_t max_terms = 4096;
  std::size_t min_samples = 10;
  bool last_layer_only = false;  // freeze hidden layers (convex fit)
};

struct TrainingSample {
  std::string text;
  double cost = 0.0;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// TF-IDF features -> standardized features -> 4-layer MLP regressing the
// standardized log1p cost. Immutable once trained.
class CostRegressor {
 public:
  CostRegressor(TfidfVectorizer vectorizer, std::vector<double> feature_mean,
                std::vector<double> feature_scale, Mlp mlp, double target_mean,
                double target_scale);

  // max(0, expm1(network output in log space)).
  KvCost predict(std::string_view text) const;
  double predict_log(std::string_view text) const;
  std::vector<double> features(std::string_view text) const;

  const TfidfVectorizer& vectorizer() const { return vectorizer_; }
  const Mlp& mlp() const { return mlp_; }
  const std::vector<double>& loss_history() const { return loss_history_; }
  void set_loss_history(std::vector<double> h) { loss_history_ = std::move(h); }

  std::string to_json(std::optional<AppClass> cls = std::nullopt) const;
  static CostRegressor from_json(std::string_view json);

 private:
  TfidfVectorizer vectorizer_;
  std::vector<double> feature_mean_;
  std::vector<double> feature_scale_;
  Mlp mlp_;
  double target_mean_;
  double target_scale_;
  std::vector<double> loss_history_;
};

// Hidden widths: h = min(|vocabulary|, mean token count), then h/2, then 32.
std::vector<std::size_t> layer_widths(std::size_t vocabulary, double mean_tokens);

// Full-batch gradient descent. Throws TrainingError for fewer than
// min_samples samples, negative costs, or a non-finite loss.
CostRegressor train_cost_regressor(std::span<const TrainingSample> samples,
                                   const TrainConfig& cfg);

enum class PredictorKind { Oracle, PerClassMlp, GlobalMlp };

std::string_view to_string(PredictorKind kind);
std::optional<PredictorKind> parse_predictor_kind(std::string_view name);

struct PredictionStats {
  std::uint64_t calls = 0;
  double total_seconds = 0.0;
  double max_seconds = 0.0;
  double mean_ms() const { return calls ? 1e3 * total_seconds / static_cast<double>(calls) : 0.0; }
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual PredictorKind kind() const = 0;
  // Same models, fresh stats. Models are shared, so clones are cheap and
  // safe to use from separate threads.
  virtual std::unique_ptr<Predictor> clone() const = 0;
  // Records per-call latency in stats().
  KvCost predict(const ApplicationJob& app);
  const PredictionStats& stats() const { return stats_; }

 protected:
  virtual KvCost estimate(const ApplicationJob& app) const = 0;

 private:
  PredictionStats stats_;
};

// Exact application cost under the cost model.
class OraclePredictor : public Predictor {
 public:
  explicit OraclePredictor(CostModel model = CostModel::memory_centric()) : model_(model) {}
  PredictorKind kind() const override { return PredictorKind::Oracle; }
  std::unique_ptr<Predictor> clone() const override {
    return std::make_unique<OraclePredictor>(model_);
  }

 protected:
  KvCost estimate(const ApplicationJob& app) const override;

 private:
  CostModel model_;
};

class MlpPredictor : public Predictor {
 public:
  // One model per class.
  explicit MlpPredictor(std::map<AppClass, std::shared_ptr<const CostRegressor>> per_class);
  // One model for every class.
  explicit MlpPredictor(std::shared_ptr<const CostRegressor> global);

  PredictorKind kind() const override {
    return global_ ? PredictorKind::GlobalMlp : PredictorKind::PerClassMlp;
  }
  std::unique_ptr<Predictor> clone() const override;
  const std::map<AppClass, std::shared_ptr<const CostRegressor>>& models() const {
    return per_class_;
  }

  void save(const std::filesystem::path& dir) const;
  static MlpPredictor load(const std::filesystem::path& dir);

 protected:
  // Throws std::out_of_range naming the class when no model covers it.
  KvCost estimate(const ApplicationJob& app) const override;

 private:
  std::map<AppClass, std::shared_ptr<const CostRegressor>> per_class_;
  std::shared_ptr<const CostRegressor> global_;
};

// `count` synthetic historical runs of one class; targets under `model`.
std::vector<TrainingSample> sample_history(AppClass cls, const ClassProfile& profile,
                                           std::size_t count, std::uint64_t seed,
                                           const CostModel& model);

struct PredictorTraining {
  std::size_t samples_per_class = 100;
  std::uint64_t seed = 1;
  TrainConfig train{};
  CostModel cost_model = CostModel::memory_centric();
};

std::unique_ptr<Predictor> make_predictor(PredictorKind kind, const LengthTable& lengths,
                                          const PredictorTraining& opts);

}  // namespace justitia
