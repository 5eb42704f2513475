#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "moodrank/error.hpp"
#include "moodrank/features.hpp"

using namespace moodrank;

TEST_CASE("word_count splits on ASCII whitespace runs") {
  CHECK(word_count("") == 0);
  CHECK(word_count("sitting in the grass") == 4);
  CHECK(word_count("a\tb\nc") == 3);
  CHECK(word_count("  leading and trailing  ") == 3);
  CHECK(word_count("\r\n\v\f") == 0);
  CHECK(split_words(" x  yz ").size() == 2);
  CHECK(split_words(" x  yz ")[1] == "yz");
}

TEST_CASE("bucket_index follows min(6, floor(wc*7/800))") {
  CHECK(bucket_index(0) == 0);
  CHECK(bucket_index(115) == 1);
  CHECK(bucket_index(114) == 0);  // 798/800
  CHECK(bucket_index(799) == 6);
  CHECK(bucket_index(5000) == 6);
  CHECK(bucket_index(static_cast<std::size_t>(-1)) == 6);

  SUBCASE("exhaustive agreement with the real-valued formula and monotonicity") {
    int previous = 0;
    for (std::size_t wc = 0; wc <= 2000; ++wc) {
      const int expected = std::min(6, static_cast<int>(std::floor(static_cast<double>(wc) * 7.0 / 800.0)));
      REQUIRE(bucket_index(wc) == expected);
      REQUIRE(bucket_index(wc) >= previous);
      previous = bucket_index(wc);
      const auto f = one_hot(bucket_index(wc));
      double sum = 0.0;
      for (double x : f.one_hot) sum += x;
      REQUIRE(sum == 1.0);
    }
  }
}

TEST_CASE("one_hot places a single 1") {
  CHECK(one_hot(0).one_hot == std::array<double, 7>{1, 0, 0, 0, 0, 0, 0});
  CHECK(one_hot(6).one_hot == std::array<double, 7>{0, 0, 0, 0, 0, 0, 1});
  CHECK(one_hot(3).bucket() == 3);
  CHECK_THROWS_AS(one_hot(7), std::invalid_argument);
  CHECK_THROWS_AS(one_hot(-1), std::invalid_argument);
  CHECK(wide_feature("one two three").bucket() == 0);
}

TEST_CASE("fit_scaler uses population statistics with a floor") {
  const std::vector<VAPoint> pts{{1, 2}, {3, 2}, {5, 2}};
  const auto s = fit_scaler(pts);
  CHECK(s.mean[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(s.std[0] == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-12));
  CHECK(s.std[0] == doctest::Approx(1.63299).epsilon(1e-5));
  CHECK(s.mean[1] == 2.0);
  CHECK(s.std[1] == kScalerStdFloor);

  const std::vector<VAPoint> single{{3, 3}};
  const auto one = fit_scaler(single);
  CHECK(one.mean == std::array<double, 2>{3, 3});
  CHECK(one.std == std::array<double, 2>{kScalerStdFloor, kScalerStdFloor});

  CHECK_THROWS_AS(fit_scaler(std::vector<VAPoint>{}), ValidationError);
}

TEST_CASE("standardize and destandardize") {
  VAScaler s;
  s.mean = {3.0, 3.0};
  s.std = {std::sqrt(8.0 / 3.0), 1.0};
  const auto mean_z = standardize({3.0, 3.0}, s);
  CHECK(mean_z[0] == 0.0);
  CHECK(mean_z[1] == 0.0);
  const auto z = standardize({5.0, 3.0}, s);
  CHECK(z[0] == doctest::Approx(1.2247449).epsilon(1e-7));
  CHECK(z[1] == 0.0);

  SUBCASE("roundtrip within 1e-9 on 1e5 random points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-10.0, 10.0), spread(0.01, 5.0);
    for (int i = 0; i < 100000; ++i) {
      VAScaler r;
      r.mean = {coord(rng), coord(rng)};
      r.std = {spread(rng), spread(rng)};
      const VAPoint p{coord(rng), coord(rng)};
      const VAPoint back = destandardize(standardize(p, r), r);
      REQUIRE(std::abs(back.valence - p.valence) <= 1e-9);
      REQUIRE(std::abs(back.arousal - p.arousal) <= 1e-9);
    }
  }
}

TEST_CASE("va_bin grid over [1,5]^2") {
  CHECK(va_bin({1.0, 1.0}) == EmotionBin{0, 0, 0});
  CHECK(va_bin({3.0, 3.0}) == EmotionBin{4, 1, 1});
  CHECK(va_bin({4.9, 2.0}) == EmotionBin{2, 2, 0});
  CHECK(va_bin({5.0, 5.0}).id == 8);
  CHECK(va_bin({-3.0, 9.0}) == EmotionBin{6, 0, 2});
  CHECK_THROWS_AS(va_bin({std::nan(""), 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(va_bin({3.0, INFINITY}), std::invalid_argument);

  SUBCASE("half-open edges") {
    const double low = 7.0 / 3.0, high = 11.0 / 3.0;
    CHECK(va_axis_index(low) == 1);
    CHECK(va_axis_index(std::nextafter(low, 0.0)) == 0);
    CHECK(va_axis_index(low - 1e-12) == 0);
    CHECK(va_axis_index(low + 1e-12) == 1);
    CHECK(va_axis_index(high) == 2);
    CHECK(va_axis_index(std::nextafter(high, 0.0)) == 1);
    CHECK(va_axis_index(high - 1e-12) == 1);
    CHECK(va_axis_index(high + 1e-12) == 2);
  }

  SUBCASE("id round trips through emotion_bin_from_id") {
    for (int id = 0; id < kEmotionBins; ++id) CHECK(emotion_bin_from_id(id).id == id);
    CHECK_THROWS_AS(emotion_bin_from_id(9), std::invalid_argument);
  }
}
