#pragma once

// Wide-and-deep regression head mapping (sentence embedding, length one-hot)
// to a standardized [valence, arousal] pair.
//
//   deep:   embedding -> Dense(relu) -> ... -> Dense(relu)
//   wide:   one-hot   -> Dense(relu) -> ...
//   fusion: concat(deep_out, wide_out) -> Dense(identity, 2)
//
// Everything runs in 64-bit floating point.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moodrank/corpus.hpp"
#include "moodrank/embedder.hpp"
#include "moodrank/features.hpp"

namespace moodrank {

enum class Activation { relu, identity };

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::relu;
  std::vector<double> weights;  // row-major, out x in
  std::vector<double> bias;     // out

  static DenseLayer zeros(std::size_t in, std::size_t out, Activation act);
  std::size_t parameter_count() const noexcept { return weights.size() + bias.size(); }
};

struct HeadShape {
  std::size_t deep_in = kEmbeddingDim;
  std::vector<std::size_t> deep_hidden{128, 64};
  std::size_t wide_in = kLengthBuckets;
  std::vector<std::size_t> wide_hidden{16};
};

class WideDeepHead {
 public:
  // Throws std::invalid_argument unless the layers chain, the fusion layer
  // is identity with 2 outputs, and its input width is deep_out + wide_out.
  WideDeepHead(std::vector<DenseLayer> deep, std::vector<DenseLayer> wide, DenseLayer fusion);

  static WideDeepHead zeros(const HeadShape& shape = {});
  // Glorot-uniform weights, zero biases.
  static WideDeepHead initialized(const HeadShape& shape, std::uint64_t seed);

  std::array<double, 2> forward(std::span<const double> deep_input, std::span<const double> wide_input) const;

  std::size_t deep_in() const noexcept;
  std::size_t wide_in() const noexcept;
  std::size_t parameter_count() const noexcept;

  const std::vector<DenseLayer>& deep() const noexcept { return deep_; }
  const std::vector<DenseLayer>& wide() const noexcept { return wide_; }
  const DenseLayer& fusion() const noexcept { return fusion_; }

  // Every weight and bias buffer in a fixed order: deep layers, wide layers,
  // fusion; weights before bias within each layer.
  std::vector<std::span<double>> parameter_blocks();
  std::vector<std::span<const double>> parameter_blocks() const;

  friend bool operator==(const WideDeepHead& a, const WideDeepHead& b);

 private:
  std::vector<DenseLayer> deep_;
  std::vector<DenseLayer> wide_;
  DenseLayer fusion_;
};

struct Sample {
  std::span<const double> deep;
  std::span<const double> wide;
  std::array<double, 2> target{};  // standardized
};

// Mean over elements of 0.5 d^2 / beta (|d| < beta) or |d| - beta / 2.
// Throws std::invalid_argument on length mismatch or beta <= 0.
double smooth_l1(std::span<const double> pred, std::span<const double> target, double beta);
double smooth_l1_derivative(double d, double beta) noexcept;

struct LossAndGradients {
  double loss = 0.0;
  WideDeepHead gradients;  // same shapes as the head; values are dLoss/dparam
};

// Exact gradients of the mean Smooth-L1 loss over the batch (mean over
// samples and both outputs). Throws std::invalid_argument on an empty batch.
LossAndGradients gradients(const WideDeepHead& head, std::span<const Sample> batch, double beta);

struct TrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  double base_lr = 2e-4;
  double warmup_fraction = 0.1;
  double smooth_l1_beta = 1.0;
  double validation_fraction = 0.1;
  std::uint64_t seed = 42;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

std::size_t warmup_steps(std::size_t total_steps, double warmup_fraction) noexcept;
// Linear ramp 0 -> base_lr over the warmup steps, then linear decay to 0 at
// total_steps.
double lr_at_step(std::size_t step, std::size_t total_steps, const TrainConfig& config);

// Uniform average of the per-dimension R^2 scores.
double r_squared(std::span<const std::array<double, 2>> preds, std::span<const std::array<double, 2>> targets);

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_r2 = 0.0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainReport {
  std::vector<EpochStats> epochs;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

struct TrainResult {
  WideDeepHead head;
  VAScaler scaler;
  TrainReport report;
};

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Seeded shuffle, then the first clamp(floor(fraction * n), 1, n - 1) indices become
// the validation split.
DataSplit split_indices(std::size_t n, double validation_fraction, std::uint64_t seed);

inline constexpr std::size_t kMinTrainingSentences = 10;

// Throws EmbeddingNotFound before any training if a sentence lacks an
// embedding, ValidationError for fewer than 10 sentences.
TrainResult train(std::span<const EmotionSentence> sentences, const EmbeddingStore& store, const TrainConfig& config,
                  const HeadShape& shape = {});

struct EvalResult {
  double loss = 0.0;
  double r2 = 0.0;
};

// Loss and R^2 in standardized space on the validation split that `config`
// (seed, validation_fraction) selects. Same arithmetic as the per-epoch
// validation in train().
EvalResult evaluate_validation(const WideDeepHead& head, const VAScaler& scaler,
                               std::span<const EmotionSentence> sentences, const EmbeddingStore& store,
                               const TrainConfig& config);

std::array<double, 2> predict_standardized(const WideDeepHead& head, const EmbeddingVector& embedding,
                                           const WideFeature& wide);
VAPoint predict_va(const WideDeepHead& head, const VAScaler& scaler, const EmbeddingStore& store,
                   std::string_view body);

struct Checkpoint {
  WideDeepHead head;
  VAScaler scaler;
  TrainConfig config;
  std::string model_tag;  // encoder that produced the training embeddings
};

inline constexpr std::string_view kCheckpointFormat = "ckpt.v1";

std::string serialize_checkpoint(const Checkpoint& ckpt);
// Throws VersionError for ckpt.v<N> with N != 1, FormatError otherwise.
Checkpoint parse_checkpoint(std::string_view text, const std::string& source = "<checkpoint>");
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace moodrank
