#include "moodrank/model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "moodrank/error.hpp"
#include "random.hpp"

namespace moodrank {
namespace {

using Buffer = std::vector<double>;

void check_layer(const DenseLayer& l, const char* where) {
  if (l.in == 0 || l.out == 0) throw std::invalid_argument(std::string(where) + ": layer with zero width");
  if (l.weights.size() != l.in * l.out || l.bias.size() != l.out) {
    throw std::invalid_argument(std::string(where) + ": parameter buffer sizes do not match layer shape");
  }
}

std::size_t check_chain(const std::vector<DenseLayer>& layers, const char* where) {
  if (layers.empty()) throw std::invalid_argument(std::string(where) + " branch has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    check_layer(layers[i], where);
    if (i > 0 && layers[i].in != layers[i - 1].out) {
      throw std::invalid_argument(std::string(where) + " branch layers do not chain");
    }
  }
  return layers.back().out;
}

void apply_layer(const DenseLayer& l, std::span<const double> in, Buffer& out) {
  out.resize(l.out);
  for (std::size_t o = 0; o < l.out; ++o) {
    const double* w = l.weights.data() + o * l.in;
    double acc = l.bias[o];
    for (std::size_t i = 0; i < l.in; ++i) acc += w[i] * in[i];
    if (l.activation == Activation::relu && acc < 0.0) acc = 0.0;
    out[o] = acc;
  }
}

// acts[k] holds the output of layer k.
void run_branch(const std::vector<DenseLayer>& layers, std::span<const double> input, std::vector<Buffer>& acts) {
  acts.resize(layers.size());
  for (std::size_t k = 0; k < layers.size(); ++k) {
    apply_layer(layers[k], k == 0 ? input : std::span<const double>(acts[k - 1]), acts[k]);
  }
}

void backprop_branch(const std::vector<DenseLayer>& layers, std::span<const double> input,
                     const std::vector<Buffer>& acts, Buffer grad_out, std::vector<DenseLayer>& grads) {
  Buffer grad_in;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const DenseLayer& l = layers[k];
    DenseLayer& g = grads[k];
    const std::span<const double> layer_in = k == 0 ? input : std::span<const double>(acts[k - 1]);
    if (l.activation == Activation::relu) {
      for (std::size_t o = 0; o < l.out; ++o) {
        if (acts[k][o] <= 0.0) grad_out[o] = 0.0;
      }
    }
    for (std::size_t o = 0; o < l.out; ++o) {
      const double go = grad_out[o];
      g.bias[o] += go;
      if (go == 0.0) continue;
      double* gw = g.weights.data() + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) gw[i] += go * layer_in[i];
    }
    if (k == 0) break;
    grad_in.assign(l.in, 0.0);
    for (std::size_t o = 0; o < l.out; ++o) {
      const double go = grad_out[o];
      if (go == 0.0) continue;
      const double* w = l.weights.data() + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) grad_in[i] += w[i] * go;
    }
    grad_out.swap(grad_in);
  }
}

std::vector<DenseLayer> zero_like(const std::vector<DenseLayer>& layers) {
  std::vector<DenseLayer> out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.push_back(DenseLayer::zeros(l.in, l.out, l.activation));
  return out;
}

std::vector<DenseLayer> zero_chain(std::size_t in, const std::vector<std::size_t>& widths) {
  std::vector<DenseLayer> layers;
  for (std::size_t w : widths) {
    layers.push_back(DenseLayer::zeros(in, w, Activation::relu));
    in = w;
  }
  return layers;
}

const char* activation_name(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

Activation activation_from(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "identity") return Activation::identity;
  throw FormatError("unknown activation '" + name + "'");
}

}  // namespace

DenseLayer DenseLayer::zeros(std::size_t in, std::size_t out, Activation act) {
  return DenseLayer{in, out, act, std::vector<double>(in * out, 0.0), std::vector<double>(out, 0.0)};
}

WideDeepHead::WideDeepHead(std::vector<DenseLayer> deep, std::vector<DenseLayer> wide, DenseLayer fusion)
    : deep_(std::move(deep)), wide_(std::move(wide)), fusion_(std::move(fusion)) {
  const std::size_t deep_out = check_chain(deep_, "deep");
  const std::size_t wide_out = check_chain(wide_, "wide");
  check_layer(fusion_, "fusion");
  if (fusion_.out != 2 || fusion_.activation != Activation::identity) {
    throw std::invalid_argument("fusion layer must be identity with 2 outputs");
  }
  if (fusion_.in != deep_out + wide_out) {
    throw std::invalid_argument("fusion input width must equal deep_out + wide_out");
  }
}

WideDeepHead WideDeepHead::zeros(const HeadShape& shape) {
  auto deep = zero_chain(shape.deep_in, shape.deep_hidden);
  auto wide = zero_chain(shape.wide_in, shape.wide_hidden);
  const std::size_t fused = (deep.empty() ? 0 : deep.back().out) + (wide.empty() ? 0 : wide.back().out);
  return WideDeepHead(std::move(deep), std::move(wide), DenseLayer::zeros(fused, 2, Activation::identity));
}

WideDeepHead WideDeepHead::initialized(const HeadShape& shape, std::uint64_t seed) {
  WideDeepHead head = zeros(shape);
  detail::Rng rng(seed);
  auto glorot = [&rng](DenseLayer& l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    for (double& w : l.weights) w = (2.0 * detail::unit_real(rng) - 1.0) * limit;
  };
  for (auto& l : head.deep_) glorot(l);
  for (auto& l : head.wide_) glorot(l);
  glorot(head.fusion_);
  return head;
}

std::array<double, 2> WideDeepHead::forward(std::span<const double> deep_input,
                                             std::span<const double> wide_input) const {
  if (deep_input.size() != deep_in() || wide_input.size() != wide_in()) {
    throw std::invalid_argument("forward: input widths do not match the head");
  }
  std::vector<Buffer> deep_acts, wide_acts;
  run_branch(deep_, deep_input, deep_acts);
  run_branch(wide_, wide_input, wide_acts);
  Buffer fused(deep_acts.back());
  fused.insert(fused.end(), wide_acts.back().begin(), wide_acts.back().end());
  Buffer out;
  apply_layer(fusion_, fused, out);
  return {out[0], out[1]};
}

std::size_t WideDeepHead::deep_in() const noexcept { return deep_.front().in; }
std::size_t WideDeepHead::wide_in() const noexcept { return wide_.front().in; }

std::size_t WideDeepHead::parameter_count() const noexcept {
  std::size_t n = fusion_.parameter_count();
  for (const auto& l : deep_) n += l.parameter_count();
  for (const auto& l : wide_) n += l.parameter_count();
  return n;
}

std::vector<std::span<double>> WideDeepHead::parameter_blocks() {
  std::vector<std::span<double>> blocks;
  auto add = [&blocks](DenseLayer& l) {
    blocks.emplace_back(l.weights);
    blocks.emplace_back(l.bias);
  };
  for (auto& l : deep_) add(l);
  for (auto& l : wide_) add(l);
  add(fusion_);
  return blocks;
}

std::vector<std::span<const double>> WideDeepHead::parameter_blocks() const {
  std::vector<std::span<const double>> blocks;
  for (auto b : const_cast<WideDeepHead*>(this)->parameter_blocks()) blocks.emplace_back(b);
  return blocks;
}

bool operator==(const WideDeepHead& a, const WideDeepHead& b) {
  auto same = [](const DenseLayer& x, const DenseLayer& y) {
    return x.in == y.in && x.out == y.out && x.activation == y.activation && x.weights == y.weights &&
           x.bias == y.bias;
  };
  return a.deep_.size() == b.deep_.size() && a.wide_.size() == b.wide_.size() &&
         std::equal(a.deep_.begin(), a.deep_.end(), b.deep_.begin(), same) &&
         std::equal(a.wide_.begin(), a.wide_.end(), b.wide_.begin(), same) && same(a.fusion_, b.fusion_);
}

double smooth_l1(std::span<const double> pred, std::span<const double> target, double beta) {
  if (pred.size() != target.size()) throw std::invalid_argument("smooth_l1: length mismatch");
  if (!(beta > 0.0)) throw std::invalid_argument("smooth_l1: beta must be positive");
  if (pred.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = std::abs(pred[i] - target[i]);
    total += d < beta ? 0.5 * d * d / beta : d - 0.5 * beta;
  }
  return total / static_cast<double>(pred.size());
}

double smooth_l1_derivative(double d, double beta) noexcept {
  if (std::abs(d) < beta) return d / beta;
  return d > 0.0 ? 1.0 : -1.0;
}

LossAndGradients gradients(const WideDeepHead& head, std::span<const Sample> batch, double beta) {
  if (batch.empty()) throw std::invalid_argument("gradients: empty batch");
  auto deep_grads = zero_like(head.deep());
  auto wide_grads = zero_like(head.wide());
  DenseLayer fusion_grad = DenseLayer::zeros(head.fusion().in, head.fusion().out, Activation::identity);

  const double scale = 1.0 / (2.0 * static_cast<double>(batch.size()));
  const std::size_t deep_out = head.deep().back().out;
  const DenseLayer& fusion = head.fusion();

  std::vector<Buffer> deep_acts, wide_acts;
  Buffer fused, out, grad_fused;
  double loss = 0.0;
  for (const Sample& s : batch) {
    if (s.deep.size() != head.deep_in() || s.wide.size() != head.wide_in()) {
      throw std::invalid_argument("gradients: sample widths do not match the head");
    }
    run_branch(head.deep(), s.deep, deep_acts);
    run_branch(head.wide(), s.wide, wide_acts);
    fused.assign(deep_acts.back().begin(), deep_acts.back().end());
    fused.insert(fused.end(), wide_acts.back().begin(), wide_acts.back().end());
    apply_layer(fusion, fused, out);

    std::array<double, 2> g{};
    for (std::size_t j = 0; j < 2; ++j) {
      const double d = out[j] - s.target[j];
      const double ad = std::abs(d);
      loss += ad < beta ? 0.5 * ad * ad / beta : ad - 0.5 * beta;
      g[j] = smooth_l1_derivative(d, beta) * scale;
    }

    grad_fused.assign(fusion.in, 0.0);
    for (std::size_t j = 0; j < 2; ++j) {
      fusion_grad.bias[j] += g[j];
      const double* w = fusion.weights.data() + j * fusion.in;
      double* gw = fusion_grad.weights.data() + j * fusion.in;
      for (std::size_t k = 0; k < fusion.in; ++k) {
        gw[k] += g[j] * fused[k];
        grad_fused[k] += w[k] * g[j];
      }
    }
    backprop_branch(head.deep(), s.deep, deep_acts, Buffer(grad_fused.begin(), grad_fused.begin() + deep_out),
                    deep_grads);
    backprop_branch(head.wide(), s.wide, wide_acts, Buffer(grad_fused.begin() + deep_out, grad_fused.end()),
                    wide_grads);
  }
  return LossAndGradients{loss * scale,
                          WideDeepHead(std::move(deep_grads), std::move(wide_grads), std::move(fusion_grad))};
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("train config: " + what); };
  if (epochs == 0) fail("epochs must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (!(base_lr > 0.0)) fail("base_lr must be positive");
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) fail("warmup_fraction must lie in (0, 1)");
  if (!(smooth_l1_beta > 0.0)) fail("smooth_l1_beta must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) fail("validation_fraction must lie in (0, 1)");
}

std::size_t warmup_steps(std::size_t total_steps, double warmup_fraction) noexcept {
  // The epsilon keeps products such as 0.1 * 30 = 3.0000000000000004 at 3.
  const double raw = std::ceil(warmup_fraction * static_cast<double>(total_steps) - 1e-9);
  return std::min(total_steps, static_cast<std::size_t>(std::max(0.0, raw)));
}

double lr_at_step(std::size_t step, std::size_t total_steps, const TrainConfig& config) {
  if (step > total_steps) throw std::invalid_argument("lr_at_step: step beyond total_steps");
  const std::size_t warm = warmup_steps(total_steps, config.warmup_fraction);
  if (step < warm) return config.base_lr * static_cast<double>(step) / static_cast<double>(warm);
  if (total_steps == warm) return step >= total_steps ? 0.0 : config.base_lr;
  return config.base_lr * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warm);
}

double r_squared(std::span<const std::array<double, 2>> preds, std::span<const std::array<double, 2>> targets) {
  if (preds.empty() || preds.size() != targets.size()) {
    throw std::invalid_argument("r_squared: inputs must be non-empty and equally long");
  }
  const double n = static_cast<double>(targets.size());
  double total = 0.0;
  for (std::size_t dim = 0; dim < 2; ++dim) {
    double mean = 0.0;
    for (const auto& t : targets) mean += t[dim];
    mean /= n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const double r = targets[i][dim] - preds[i][dim];
      const double c = targets[i][dim] - mean;
      ss_res += r * r;
      ss_tot += c * c;
    }
    if (ss_tot == 0.0) {
      total += ss_res == 0.0 ? 1.0 : 0.0;
    } else {
      total += 1.0 - ss_res / ss_tot;
    }
  }
  return total / 2.0;
}

std::array<double, 2> predict_standardized(const WideDeepHead& head, const EmbeddingVector& embedding,
                                           const WideFeature& wide) {
  const Buffer deep(embedding.begin(), embedding.end());
  return head.forward(deep, wide.one_hot);
}

VAPoint predict_va(const WideDeepHead& head, const VAScaler& scaler, const EmbeddingStore& store,
                   std::string_view body) {
  return destandardize(predict_standardized(head, get_embedding(store, body), wide_feature(body)), scaler);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

using ojson = nlohmann::ordered_json;

ojson layer_json(const DenseLayer& l, const char* branch) {
  return ojson{{"branch", branch}, {"in", l.in},         {"out", l.out},
               {"act", activation_name(l.activation)}, {"w", l.weights}, {"b", l.bias}};
}

DenseLayer layer_from(const nlohmann::json& j) {
  DenseLayer l;
  l.in = j.at("in").get<std::size_t>();
  l.out = j.at("out").get<std::size_t>();
  l.activation = activation_from(j.at("act").get<std::string>());
  l.weights = j.at("w").get<std::vector<double>>();
  l.bias = j.at("b").get<std::vector<double>>();
  if (l.weights.size() != l.in * l.out || l.bias.size() != l.out) {
    throw FormatError("checkpoint layer parameter counts do not match its shape");
  }
  return l;
}

void check_format(const nlohmann::json& doc, const std::string& source) {
  if (!doc.contains("format") || !doc["format"].is_string()) throw FormatError(source + ": missing format tag");
  const auto tag = doc["format"].get<std::string>();
  if (tag == kCheckpointFormat) return;
  constexpr std::string_view kFamily = "ckpt.v";
  if (tag.rfind(kFamily, 0) == 0) {
    throw VersionError(source + ": checkpoint version '" + tag.substr(kFamily.size()) + "' is not supported (reader " +
                       std::string(kCheckpointFormat) + ")");
  }
  throw FormatError(source + ": not a checkpoint (format '" + tag + "')");
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  ojson layers = ojson::array();
  for (const auto& l : ckpt.head.deep()) layers.push_back(layer_json(l, "deep"));
  for (const auto& l : ckpt.head.wide()) layers.push_back(layer_json(l, "wide"));
  layers.push_back(layer_json(ckpt.head.fusion(), "fusion"));
  const TrainConfig& c = ckpt.config;
  ojson doc{
      {"format", std::string(kCheckpointFormat)},
      {"model", ckpt.model_tag},
      {"scaler", {{"mean", ckpt.scaler.mean}, {"std", ckpt.scaler.std}}},
      {"layers", std::move(layers)},
      {"config",
       {{"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"base_lr", c.base_lr},
        {"warmup_fraction", c.warmup_fraction},
        {"smooth_l1_beta", c.smooth_l1_beta},
        {"validation_fraction", c.validation_fraction},
        {"seed", c.seed}}},
  };
  return doc.dump() + "\n";
}

Checkpoint parse_checkpoint(std::string_view text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(source + ": corrupted checkpoint: " + e.what());
  }
  if (!doc.is_object()) throw FormatError(source + ": checkpoint is not a JSON object");
  check_format(doc, source);
  try {
    std::vector<DenseLayer> deep, wide;
    std::optional<DenseLayer> fusion;
    for (const auto& lj : doc.at("layers")) {
      const auto branch = lj.at("branch").get<std::string>();
      if (branch == "deep") {
        deep.push_back(layer_from(lj));
      } else if (branch == "wide") {
        wide.push_back(layer_from(lj));
      } else if (branch == "fusion" && !fusion) {
        fusion = layer_from(lj);
      } else {
        throw FormatError("unexpected layer branch '" + branch + "'");
      }
    }
    if (!fusion) throw FormatError("checkpoint has no fusion layer");
    VAScaler scaler;
    scaler.mean = doc.at("scaler").at("mean").get<std::array<double, 2>>();
    scaler.std = doc.at("scaler").at("std").get<std::array<double, 2>>();
    const auto& cj = doc.at("config");
    TrainConfig config;
    config.epochs = cj.at("epochs").get<std::size_t>();
    config.batch_size = cj.at("batch_size").get<std::size_t>();
    config.base_lr = cj.at("base_lr").get<double>();
    config.warmup_fraction = cj.at("warmup_fraction").get<double>();
    config.smooth_l1_beta = cj.at("smooth_l1_beta").get<double>();
    config.validation_fraction = cj.at("validation_fraction").get<double>();
    config.seed = cj.at("seed").get<std::uint64_t>();
    std::string model = doc.value("model", std::string{});
    return Checkpoint{WideDeepHead(std::move(deep), std::move(wide), std::move(*fusion)), scaler, config,
                      std::move(model)};
  } catch (const FormatError& e) {
    throw FormatError(source + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(source + ": malformed checkpoint: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(source + ": inconsistent checkpoint: " + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  detail::write_text_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(detail::read_text_file(path), path.string());
}

}  // namespace moodrank
