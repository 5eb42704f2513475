#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "moodrank/error.hpp"
#include "moodrank/model.hpp"

using namespace moodrank;

TEST_CASE("forward") {
  SUBCASE("zero weights return the fusion bias") {
    auto head = WideDeepHead::zeros();
    auto& fusion_bias = head.parameter_blocks().back();
    fusion_bias[0] = 0.25;
    fusion_bias[1] = -1.5;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 10; ++i) {
      std::vector<double> x(384);
      for (double& v : x) v = u(rng);
      const auto out = head.forward(x, one_hot(i % 7).one_hot);
      CHECK(out[0] == 0.25);
      CHECK(out[1] == -1.5);
    }
  }

  SUBCASE("hand-computed toy head") {
    const auto head = testing::toy_head();
    const std::vector<double> deep{2.0, 0.5}, wide{1.0, 0.0};
    const auto out = head.forward(deep, wide);
    CHECK(out[0] == doctest::Approx(5.6).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(-0.7).epsilon(1e-15));
    // relu clamps a negative deep pre-activation: deep = relu(0 - 2 + 0.5) = 0
    const std::vector<double> deep2{0.0, 1.0};
    const auto out2 = head.forward(deep2, wide);
    CHECK(out2[0] == doctest::Approx(4.1).epsilon(1e-15));
    CHECK(out2[1] == doctest::Approx(0.8).epsilon(1e-15));
  }

  SUBCASE("shape contract") {
    const auto head = WideDeepHead::initialized({}, 3);
    CHECK(head.parameter_count() < 100000);
    CHECK(head.parameter_count() == 384 * 128 + 128 + 128 * 64 + 64 + 7 * 16 + 16 + 80 * 2 + 2);
    std::vector<double> x(384, 0.1), w(7, 0.0);
    w[2] = 1.0;
    CHECK(head.forward(x, w).size() == 2);
    std::vector<double> short_x(383, 0.1);
    CHECK_THROWS_AS(head.forward(short_x, w), std::invalid_argument);
    CHECK_THROWS_AS(WideDeepHead({testing::layer(2, 3, Activation::relu, std::vector<double>(6), std::vector<double>(3))},
                                 {testing::layer(2, 1, Activation::relu, std::vector<double>(2), std::vector<double>(1))},
                                 testing::layer(2, 2, Activation::identity, std::vector<double>(4), std::vector<double>(2))),
                    std::invalid_argument);
  }

  SUBCASE("Glorot bounds and seeding") {
    const auto a = WideDeepHead::initialized({}, 9);
    const auto b = WideDeepHead::initialized({}, 9);
    const auto c = WideDeepHead::initialized({}, 10);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    const auto& first = a.deep().front();
    const double limit = std::sqrt(6.0 / (384.0 + 128.0));
    double max_abs = 0.0;
    for (double w : first.weights) max_abs = std::max(max_abs, std::abs(w));
    CHECK(max_abs <= limit);
    CHECK(max_abs > 0.9 * limit);
    for (double bias : first.bias) CHECK(bias == 0.0);
  }
}

TEST_CASE("smooth_l1") {
  const std::vector<double> zero{0.0}, half{0.5}, two{2.0};
  CHECK(smooth_l1(half, half, 1.0) == 0.0);
  CHECK(smooth_l1(half, zero, 1.0) == 0.125);
  CHECK(smooth_l1(two, zero, 1.0) == 1.5);
  const std::vector<double> p{0.5, 2.0}, t{0.0, 0.0};
  CHECK(smooth_l1(p, t, 1.0) == doctest::Approx((0.125 + 1.5) / 2).epsilon(1e-15));
  CHECK_THROWS_AS(smooth_l1(p, zero, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(smooth_l1(half, zero, 0.0), std::invalid_argument);

  SUBCASE("continuous and once differentiable at |d| = beta") {
    for (double beta : {0.1, 1.0, 2.5}) {
      const double quadratic = 0.5 * beta * beta / beta;
      const double linear = beta - beta / 2;
      CHECK(std::abs(quadratic - linear) <= 1e-12);
      const std::vector<double> at{beta}, origin{0.0};
      CHECK(std::abs(smooth_l1(at, origin, beta) - linear) <= 1e-12);
      const double below = smooth_l1_derivative(std::nextafter(beta, 0.0), beta);
      CHECK(std::abs(below - smooth_l1_derivative(beta, beta)) <= 1e-12);
      CHECK(smooth_l1_derivative(-beta, beta) == -1.0);
    }
  }

  SUBCASE("non-negative, zero only at pred = target") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 1000; ++i) {
      const std::vector<double> a{u(rng), u(rng)}, b{u(rng), u(rng)};
      CHECK(smooth_l1(a, b, 1.0) > 0.0);
      CHECK(smooth_l1(a, a, 1.0) == 0.0);
    }
  }
}

namespace {

std::vector<Sample> random_batch(const WideDeepHead& head, std::mt19937_64& rng, std::vector<std::vector<double>>& storage) {
  std::uniform_int_distribution<std::size_t> size(1, 4);
  std::uniform_real_distribution<double> u(-2, 2);
  const std::size_t n = size(rng);
  storage.clear();
  storage.reserve(2 * n);
  std::vector<Sample> batch;
  for (std::size_t i = 0; i < n; ++i) {
    auto& deep = storage.emplace_back(head.deep_in());
    for (double& x : deep) x = u(rng);
    auto& wide = storage.emplace_back(head.wide_in());
    for (double& x : wide) x = u(rng);
    batch.push_back(Sample{storage[storage.size() - 2], storage.back(), {u(rng), u(rng)}});
  }
  return batch;
}

double batch_loss(const WideDeepHead& head, std::span<const Sample> batch) {
  double total = 0.0;
  for (const auto& s : batch) {
    const auto out = head.forward(s.deep, s.wide);
    total += smooth_l1(out, s.target, 1.0);
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace

TEST_CASE("gradients match central finite differences on random toy heads") {
  std::mt19937_64 rng(2024);
  const double h = 1e-4;
  for (int trial = 0; trial < 20; ++trial) {
    auto head = testing::random_head(rng);
    std::vector<std::vector<double>> storage;
    const auto batch = random_batch(head, rng, storage);
    const auto analytic = gradients(head, batch, 1.0);
    CHECK(analytic.loss == doctest::Approx(batch_loss(head, batch)).epsilon(1e-12));

    auto blocks = head.parameter_blocks();
    const auto grad_blocks = analytic.gradients.parameter_blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (std::size_t i = 0; i < blocks[b].size(); ++i) {
        const double saved = blocks[b][i];
        blocks[b][i] = saved + h;
        const double up = batch_loss(head, batch);
        blocks[b][i] = saved - h;
        const double down = batch_loss(head, batch);
        blocks[b][i] = saved;
        const double numeric = (up - down) / (2 * h);
        const double a = grad_blocks[b][i];
        const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
        INFO("trial " << trial << " block " << b << " index " << i);
        CHECK(std::abs(a - numeric) / scale <= 1e-4);
      }
    }
  }
}

TEST_CASE("gradient identities") {
  std::mt19937_64 rng(77);
  auto head = testing::random_head(rng);
  std::vector<std::vector<double>> storage;
  auto batch = random_batch(head, rng, storage);

  SUBCASE("zero at pred = target") {
    for (auto& s : batch) s.target = head.forward(s.deep, s.wide);
    const auto g = gradients(head, batch, 1.0);
    CHECK(g.loss == 0.0);
    for (auto block : g.gradients.parameter_blocks()) {
      for (double x : block) CHECK(x == 0.0);
    }
  }

  SUBCASE("duplicating every row leaves gradients unchanged") {
    std::vector<Sample> doubled = batch;
    doubled.insert(doubled.end(), batch.begin(), batch.end());
    const auto g1 = gradients(head, batch, 1.0);
    const auto g2 = gradients(head, doubled, 1.0);
    CHECK(g2.loss == doctest::Approx(g1.loss).epsilon(1e-12));
    const auto b1 = g1.gradients.parameter_blocks();
    const auto b2 = g2.gradients.parameter_blocks();
    for (std::size_t b = 0; b < b1.size(); ++b) {
      for (std::size_t i = 0; i < b1[b].size(); ++i) CHECK(std::abs(b1[b][i] - b2[b][i]) <= 1e-12);
    }
  }

  CHECK_THROWS_AS(gradients(head, std::span<const Sample>{}, 1.0), std::invalid_argument);
}

TEST_CASE("warmup-linear schedule") {
  TrainConfig cfg;
  cfg.base_lr = 1e-3;
  CHECK(warmup_steps(100, 0.1) == 10);
  CHECK(warmup_steps(95, 0.1) == 10);
  CHECK(warmup_steps(7, 0.1) == 1);
  CHECK(lr_at_step(0, 100, cfg) == 0.0);
  CHECK(lr_at_step(5, 100, cfg) == doctest::Approx(5e-4).epsilon(1e-15));
  CHECK(lr_at_step(10, 100, cfg) == cfg.base_lr);
  CHECK(lr_at_step(55, 100, cfg) == doctest::Approx(cfg.base_lr / 2).epsilon(1e-15));
  CHECK(lr_at_step(100, 100, cfg) == 0.0);
  CHECK_THROWS_AS(lr_at_step(101, 100, cfg), std::invalid_argument);

  for (std::size_t total : {1u, 2u, 9u, 10u, 11u, 338u, 1000u}) {
    const std::size_t w = warmup_steps(total, cfg.warmup_fraction);
    double peak = 0.0;
    for (std::size_t s = 0; s <= total; ++s) {
      const double lr = lr_at_step(s, total, cfg);
      CHECK(lr >= 0.0);
      CHECK(lr <= cfg.base_lr);
      peak = std::max(peak, lr);
    }
    if (w < total) {
      // The ramp and the decay meet at the peak.
      CHECK(lr_at_step(w, total, cfg) == cfg.base_lr);
      CHECK(peak == cfg.base_lr);
    }
  }
}

TEST_CASE("r_squared") {
  using P = std::array<double, 2>;
  const std::vector<P> t{{0, 0}, {2, 2}};
  CHECK(r_squared(t, t) == 1.0);
  const std::vector<P> at_mean{{1, 1}, {1, 1}};
  CHECK(r_squared(at_mean, t) == 0.0);
  const std::vector<P> t3{{1, 5}, {2, 5}, {3, 5}};
  const std::vector<P> p3{{1, 5}, {2, 5}, {3, 5}};
  CHECK(r_squared(p3, t3) == 1.0);
  const std::vector<P> p3b{{1, 4}, {2, 5}, {3, 5}};
  CHECK(r_squared(p3b, t3) == 0.5);
  // dim 0: SS_res = 1, SS_tot = 2 -> 0.5; dim 1 exact -> 1
  const std::vector<P> p3c{{1, 5}, {2, 5}, {2, 5}};
  CHECK(r_squared(p3c, t3) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_THROWS_AS(r_squared(std::vector<P>{}, std::vector<P>{}), std::invalid_argument);
  CHECK_THROWS_AS(r_squared(p3, t), std::invalid_argument);
}

TEST_CASE("predict_va composes forward and destandardize") {
  EmbeddingStore store(2, "toy");
  store.insert(text_key("short text"), {2.0f, 0.5f});
  VAScaler scaler;
  scaler.mean = {3.0, 3.0};
  scaler.std = {0.5, 2.0};
  const auto head = testing::toy_head(kLengthBuckets);
  const auto va = predict_va(head, scaler, store, "short text");
  CHECK(va.valence == doctest::Approx(3.0 + 5.6 * 0.5).epsilon(1e-15));
  CHECK(va.arousal == doctest::Approx(3.0 - 0.7 * 2.0).epsilon(1e-15));
  const auto again = predict_va(head, scaler, store, "short text");
  CHECK(again.valence == va.valence);
  CHECK(again.arousal == va.arousal);
  CHECK_THROWS_AS(predict_va(head, scaler, store, "unknown"), EmbeddingNotFound);

  EmbeddingStore big(384, "zero");
  big.insert(text_key("anything"), EmbeddingVector(384, 0.3f));
  const auto zero = predict_va(WideDeepHead::zeros(), scaler, big, "anything");
  CHECK(zero.valence == 3.0);
  CHECK(zero.arousal == 3.0);
}

TEST_CASE("checkpoint roundtrip") {
  Checkpoint ckpt{WideDeepHead::initialized({}, 5), {}, {}, "enc-v1"};
  ckpt.scaler.mean = {3.0123456789012345, 2.9};
  ckpt.scaler.std = {0.1 + 0.2, 1e-8};
  ckpt.config.seed = 0xFFFFFFFFFFFFFFFFull;
  ckpt.config.epochs = 7;
  auto blocks = ckpt.head.parameter_blocks();
  blocks.back()[0] = 1.0 / 3.0;

  const std::string text = serialize_checkpoint(ckpt);
  const auto loaded = parse_checkpoint(text);
  CHECK(loaded.head == ckpt.head);
  CHECK(loaded.scaler.mean == ckpt.scaler.mean);
  CHECK(loaded.scaler.std == ckpt.scaler.std);
  CHECK(loaded.config == ckpt.config);
  CHECK(loaded.model_tag == "enc-v1");
  CHECK(serialize_checkpoint(loaded) == text);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(384);
    for (double& v : x) v = u(rng);
    const auto w = one_hot(static_cast<int>(rng() % 7)).one_hot;
    const auto a = ckpt.head.forward(x, w);
    const auto b = loaded.head.forward(x, w);
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
  }

  SUBCASE("file roundtrip") {
    testing::TempDir dir("ckpt");
    save_checkpoint(ckpt, dir / "model.json");
    CHECK(load_checkpoint(dir / "model.json").head == ckpt.head);
    CHECK_THROWS_AS(load_checkpoint(dir / "absent.json"), Error);
  }

  SUBCASE("corruption and version errors") {
    CHECK_THROWS_AS(parse_checkpoint(text.substr(0, text.size() / 2)), FormatError);
    CHECK_THROWS_AS(parse_checkpoint("{}"), FormatError);
    CHECK_THROWS_AS(parse_checkpoint(""), FormatError);
    std::string v2 = text;
    v2.replace(v2.find("ckpt.v1"), 7, "ckpt.v2");
    CHECK_THROWS_AS(parse_checkpoint(v2), VersionError);
    std::string bad_shape = text;
    bad_shape.replace(bad_shape.find("\"out\":128"), 9, "\"out\":127");
    CHECK_THROWS_AS(parse_checkpoint(bad_shape), FormatError);
  }
}
