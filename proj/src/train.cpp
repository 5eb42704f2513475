#include <algorithm>
#include <cmath>

#include "moodrank/error.hpp"
#include "moodrank/model.hpp"
#include "random.hpp"

namespace moodrank {
namespace {

// Derived stream seeds so that the split depends on the seed alone and
// stays reproducible for evaluate_validation().
constexpr std::uint64_t kInitStream = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kShuffleStream = 0xD1B54A32D192ED03ULL;

struct FeatureRows {
  std::size_t dim = 0;
  std::vector<double> deep;  // n x dim, row-major
  std::vector<WideFeature> wide;
  std::vector<VAPoint> targets;

  std::span<const double> deep_row(std::size_t i) const { return {deep.data() + i * dim, dim}; }
};

FeatureRows build_rows(std::span<const EmotionSentence> sentences, const EmbeddingStore& store) {
  std::vector<const EmbeddingVector*> vectors;
  std::vector<std::string> missing;
  vectors.reserve(sentences.size());
  for (const auto& s : sentences) {
    std::string key = text_key(s.body);
    const auto* v = store.find_key(key);
    if (v == nullptr) missing.push_back(std::move(key));
    vectors.push_back(v);
  }
  if (!missing.empty()) throw EmbeddingNotFound(std::move(missing));

  FeatureRows rows;
  rows.dim = store.dim();
  rows.deep.reserve(sentences.size() * rows.dim);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    rows.deep.insert(rows.deep.end(), vectors[i]->begin(), vectors[i]->end());
    rows.wide.push_back(wide_feature(sentences[i].body));
    rows.targets.push_back({sentences[i].valence, sentences[i].arousal});
  }
  return rows;
}

EvalResult evaluate(const WideDeepHead& head, const VAScaler& scaler, const FeatureRows& rows,
                    std::span<const std::size_t> indices, double beta) {
  std::vector<std::array<double, 2>> preds, targets;
  std::vector<double> flat_pred, flat_target;
  preds.reserve(indices.size());
  targets.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto p = head.forward(rows.deep_row(i), rows.wide[i].one_hot);
    const auto t = standardize(rows.targets[i], scaler);
    preds.push_back(p);
    targets.push_back(t);
    flat_pred.insert(flat_pred.end(), p.begin(), p.end());
    flat_target.insert(flat_target.end(), t.begin(), t.end());
  }
  return {smooth_l1(flat_pred, flat_target, beta), r_squared(preds, targets)};
}

class Adam {
 public:
  explicit Adam(const WideDeepHead& head) {
    for (auto block : head.parameter_blocks()) {
      m_.emplace_back(block.size(), 0.0);
      v_.emplace_back(block.size(), 0.0);
    }
  }

  void step(WideDeepHead& head, const WideDeepHead& grads, double lr) {
    ++t_;
    const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    auto params = head.parameter_blocks();
    const auto g = grads.parameter_blocks();
    for (std::size_t b = 0; b < params.size(); ++b) {
      auto& m = m_[b];
      auto& v = v_[b];
      for (std::size_t i = 0; i < params[b].size(); ++i) {
        const double gi = g[b][i];
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * gi;
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * gi * gi;
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        params[b][i] -= lr * m_hat / (std::sqrt(v_hat) + kEps);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace

DataSplit split_indices(std::size_t n, double validation_fraction, std::uint64_t seed) {
  if (n < 2) throw ValidationError("need at least 2 rows to split");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  detail::Rng rng(seed);
  detail::shuffle(std::span<std::size_t>(order), rng);
  const auto wanted = static_cast<std::size_t>(std::floor(validation_fraction * static_cast<double>(n) + 1e-9));
  const std::size_t n_val = std::clamp<std::size_t>(wanted, 1, n - 1);
  DataSplit split;
  split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  return split;
}

TrainResult train(std::span<const EmotionSentence> sentences, const EmbeddingStore& store, const TrainConfig& config,
                  const HeadShape& shape) {
  config.validate();
  if (shape.deep_in != store.dim()) throw std::invalid_argument("head deep input width differs from store dim");
  const FeatureRows rows = build_rows(sentences, store);
  if (sentences.size() < kMinTrainingSentences) {
    throw ValidationError("training needs at least " + std::to_string(kMinTrainingSentences) + " sentences, got " +
                          std::to_string(sentences.size()));
  }

  const DataSplit split = split_indices(sentences.size(), config.validation_fraction, config.seed);
  std::vector<VAPoint> train_targets;
  for (std::size_t i : split.train) train_targets.push_back(rows.targets[i]);
  const VAScaler scaler = fit_scaler(train_targets);

  std::vector<std::array<double, 2>> standardized(rows.targets.size());
  for (std::size_t i = 0; i < rows.targets.size(); ++i) standardized[i] = standardize(rows.targets[i], scaler);

  WideDeepHead head = WideDeepHead::initialized(shape, config.seed ^ kInitStream);
  Adam optimizer(head);
  detail::Rng shuffle_rng(config.seed ^ kShuffleStream);

  const std::size_t n_train = split.train.size();
  const std::size_t batches_per_epoch = (n_train + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = batches_per_epoch * config.epochs;

  TrainReport report;
  std::vector<std::size_t> order = split.train;
  std::vector<Sample> batch;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    detail::shuffle(std::span<std::size_t>(order), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n_train; start += config.batch_size) {
      const std::size_t end = std::min(n_train, start + config.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        batch.push_back(Sample{rows.deep_row(i), rows.wide[i].one_hot, standardized[i]});
      }
      const auto result = gradients(head, batch, config.smooth_l1_beta);
      loss_sum += result.loss * static_cast<double>(batch.size());
      optimizer.step(head, result.gradients, lr_at_step(step, total_steps, config));
      ++step;
    }
    const EvalResult val = evaluate(head, scaler, rows, split.validation, config.smooth_l1_beta);
    report.epochs.push_back({loss_sum / static_cast<double>(n_train), val.loss, val.r2});
  }
  return TrainResult{std::move(head), scaler, std::move(report)};
}

EvalResult evaluate_validation(const WideDeepHead& head, const VAScaler& scaler,
                               std::span<const EmotionSentence> sentences, const EmbeddingStore& store,
                               const TrainConfig& config) {
  const FeatureRows rows = build_rows(sentences, store);
  const DataSplit split = split_indices(sentences.size(), config.validation_fraction, config.seed);
  return evaluate(head, scaler, rows, split.validation, config.smooth_l1_beta);
}

}  // namespace moodrank
