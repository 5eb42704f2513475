#pragma once

#include <cstdint>
#include <unistd.h>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "moodrank/model.hpp"

namespace testing {

inline moodrank::DenseLayer layer(std::size_t in, std::size_t out, moodrank::Activation act,
                                  std::vector<double> w, std::vector<double> b) {
  moodrank::DenseLayer l;
  l.in = in;
  l.out = out;
  l.activation = act;
  l.weights = std::move(w);
  l.bias = std::move(b);
  return l;
}

// deep: 2 -> 1 relu, wide: `wide_in` -> 1 relu, fusion: 2 -> 2.
// For deep input (2, 0.5) and a wide one-hot at position 0 the output is
// (5.6, -0.7):
//   deep  = relu(1*2 - 2*0.5 + 0.5) = 1.5
//   wide  = relu(3*1 - 1)           = 2
//   out_0 = 1*1.5 + 2*2 + 0.1       = 5.6
//   out_1 = -1*1.5 + 0.5*2 - 0.2    = -0.7
inline moodrank::WideDeepHead toy_head(std::size_t wide_in = 2) {
  using moodrank::Activation;
  std::vector<double> wide_w(wide_in, 0.0);
  wide_w[0] = 3.0;
  if (wide_in > 1) wide_w[1] = 1.0;
  return moodrank::WideDeepHead({layer(2, 1, Activation::relu, {1.0, -2.0}, {0.5})},
                                {layer(wide_in, 1, Activation::relu, wide_w, {-1.0})},
                                layer(2, 2, Activation::identity, {1.0, 2.0, -1.0, 0.5}, {0.1, -0.2}));
}

// Random head with every width in [1, 8] and parameters in [-1, 1].
inline moodrank::WideDeepHead random_head(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> width(1, 8), depth(1, 2);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  moodrank::HeadShape shape;
  shape.deep_in = width(rng);
  shape.wide_in = width(rng);
  shape.deep_hidden.clear();
  shape.wide_hidden.clear();
  for (std::size_t i = depth(rng); i > 0; --i) shape.deep_hidden.push_back(width(rng));
  for (std::size_t i = depth(rng); i > 0; --i) shape.wide_hidden.push_back(width(rng));
  auto head = moodrank::WideDeepHead::zeros(shape);
  for (auto block : head.parameter_blocks()) {
    for (double& x : block) x = value(rng);
  }
  return head;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("moodrank-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
