#include "moodrank/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "moodrank/error.hpp"

namespace moodrank {

int WideFeature::bucket() const {
  const auto it = std::find(one_hot.begin(), one_hot.end(), 1.0);
  return static_cast<int>(it - one_hot.begin());
}

bool is_word_separator(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::vector<std::string_view> split_words(std::string_view body) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < body.size()) {
    while (i < body.size() && is_word_separator(body[i])) ++i;
    const std::size_t start = i;
    while (i < body.size() && !is_word_separator(body[i])) ++i;
    if (i > start) words.push_back(body.substr(start, i - start));
  }
  return words;
}

std::size_t word_count(std::string_view body) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : body) {
    const bool sep = is_word_separator(c);
    if (!sep && !in_word) ++count;
    in_word = !sep;
  }
  return count;
}

int bucket_index(std::size_t wc) noexcept {
  if (wc >= kLengthBucketSpan) return kLengthBuckets - 1;
  return std::min(kLengthBuckets - 1, static_cast<int>(wc * kLengthBuckets / kLengthBucketSpan));
}

WideFeature one_hot(int bucket) {
  if (bucket < 0 || bucket >= kLengthBuckets) {
    throw std::invalid_argument("one_hot: bucket " + std::to_string(bucket) + " outside [0, " +
                                std::to_string(kLengthBuckets - 1) + "]");
  }
  WideFeature f;
  f.one_hot[static_cast<std::size_t>(bucket)] = 1.0;
  return f;
}

WideFeature wide_feature(std::string_view body) { return one_hot(bucket_index(word_count(body))); }

VAScaler fit_scaler(std::span<const VAPoint> targets) {
  if (targets.empty()) throw ValidationError("fit_scaler: no targets");
  const double n = static_cast<double>(targets.size());
  double sum_v = 0.0, sum_a = 0.0;
  for (const auto& p : targets) {
    sum_v += p.valence;
    sum_a += p.arousal;
  }
  VAScaler s;
  s.mean = {sum_v / n, sum_a / n};
  double ss_v = 0.0, ss_a = 0.0;
  for (const auto& p : targets) {
    const double dv = p.valence - s.mean[0];
    const double da = p.arousal - s.mean[1];
    ss_v += dv * dv;
    ss_a += da * da;
  }
  s.std = {std::max(std::sqrt(ss_v / n), kScalerStdFloor), std::max(std::sqrt(ss_a / n), kScalerStdFloor)};
  return s;
}

std::array<double, 2> standardize(const VAPoint& p, const VAScaler& s) noexcept {
  return {(p.valence - s.mean[0]) / s.std[0], (p.arousal - s.mean[1]) / s.std[1]};
}

VAPoint destandardize(const std::array<double, 2>& z, const VAScaler& s) noexcept {
  return {z[0] * s.std[0] + s.mean[0], z[1] * s.std[1] + s.mean[1]};
}

int va_axis_index(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("va_bin: non-finite coordinate");
  constexpr double kLowEdge = 7.0 / 3.0;
  constexpr double kHighEdge = 11.0 / 3.0;
  if (x < kLowEdge) return 0;
  if (x < kHighEdge) return 1;
  return 2;
}

EmotionBin va_bin(const VAPoint& p) {
  EmotionBin b;
  b.v_index = va_axis_index(p.valence);
  b.a_index = va_axis_index(p.arousal);
  b.id = b.a_index * 3 + b.v_index;
  return b;
}

EmotionBin emotion_bin_from_id(int id) {
  if (id < 0 || id >= kEmotionBins) {
    throw std::invalid_argument("emotion bin id " + std::to_string(id) + " outside [0, 8]");
  }
  return {id, id % 3, id / 3};
}

}  // namespace moodrank
