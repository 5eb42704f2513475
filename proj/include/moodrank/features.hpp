#pragma once

// Deterministic feature engineering shared by training, annotation and
// recommendation: word counting, the length-bucket one-hot (the "wide"
// input), target standardization and the 3x3 emotion grid.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace moodrank {

inline constexpr int kLengthBuckets = 7;
inline constexpr std::size_t kLengthBucketSpan = 800;  // words covered by the equal-width buckets
inline constexpr int kEmotionBins = 9;
inline constexpr double kScalerStdFloor = 1e-8;

// Corpus scale is nominally [1, 5] on both axes.
struct VAPoint {
  double valence = 0.0;
  double arousal = 0.0;

  friend bool operator==(const VAPoint&, const VAPoint&) = default;
};

struct WideFeature {
  std::array<double, kLengthBuckets> one_hot{};

  int bucket() const;
};

// Per-dimension population statistics of the training targets.
struct VAScaler {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> std{1.0, 1.0};

  friend bool operator==(const VAScaler&, const VAScaler&) = default;
};

// Cell of the 3x3 grid over [1,5]^2; id = a_index * 3 + v_index.
struct EmotionBin {
  int id = 0;
  int v_index = 0;
  int a_index = 0;

  friend bool operator==(const EmotionBin&, const EmotionBin&) = default;
};

// Whitespace is ASCII: space, \t, \n, \r, \v, \f.
bool is_word_separator(char c) noexcept;
std::vector<std::string_view> split_words(std::string_view body);
std::size_t word_count(std::string_view body);

// min(6, floor(wc * 7 / 800)).
int bucket_index(std::size_t wc) noexcept;
// Throws std::invalid_argument for a bucket outside [0, 6].
WideFeature one_hot(int bucket);
WideFeature wide_feature(std::string_view body);

// Throws ValidationError on an empty list.
VAScaler fit_scaler(std::span<const VAPoint> targets);
std::array<double, 2> standardize(const VAPoint& p, const VAScaler& s) noexcept;
VAPoint destandardize(const std::array<double, 2>& z, const VAScaler& s) noexcept;

// Axis index: 0 below 7/3, 1 in [7/3, 11/3), 2 from 11/3 up. Values outside
// [1,5] land in the nearest end cell. Non-finite input throws
// std::invalid_argument.
int va_axis_index(double x);
EmotionBin va_bin(const VAPoint& p);
EmotionBin emotion_bin_from_id(int id);

}  // namespace moodrank
