#include "eegscreen/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "eegscreen/error.hpp"
#include "eegscreen/rng.hpp"

namespace eegscreen {

namespace {

constexpr std::size_t kPredictBatch = 64;

Var<float> kaiming_uniform(const Shape& dims, std::size_t fan_in, SplitMix64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  Tensor<float> t(dims);
  for (auto& v : t.values()) v = static_cast<float>(rng.uniform(-bound, bound));
  return Var<float>(std::move(t), true);
}

ConvBn make_conv_bn(std::size_t in_c, std::size_t out_c, std::size_t kernel, std::size_t stride, std::size_t pad,
                    SplitMix64& rng) {
  ConvBn layer;
  layer.weight = kaiming_uniform({out_c, in_c, kernel, kernel}, in_c * kernel * kernel, rng);
  layer.gamma = Var<float>(Tensor<float>({out_c}, 1.0f), true);
  layer.beta = Var<float>(Tensor<float>({out_c}, 0.0f), true);
  layer.stats = nn::BatchNormStats<float>(out_c);
  layer.stride = stride;
  layer.pad = pad;
  return layer;
}

void append_conv_bn(std::vector<NamedTensor>& out, const std::string& prefix, ConvBn& layer) {
  out.push_back({prefix + ".weight", &layer.weight.mutable_value()});
  out.push_back({prefix + ".bn.gamma", &layer.gamma.mutable_value()});
  out.push_back({prefix + ".bn.beta", &layer.beta.mutable_value()});
  out.push_back({prefix + ".bn.running_mean", &layer.stats.running_mean});
  out.push_back({prefix + ".bn.running_var", &layer.stats.running_var});
}

}  // namespace

ModelConfig ModelConfig::with_width_factor(double factor, std::size_t input_h, std::size_t input_w) {
  if (!(factor > 0.0)) throw Error(Errc::BadConfig, "width factor must be positive");
  ModelConfig cfg;
  cfg.input_h = input_h;
  cfg.input_w = input_w;
  for (auto& w : cfg.stage_widths)
    w = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(w) * factor)));
  return cfg;
}

void validate(const ModelConfig& cfg) {
  if (cfg.in_channels == 0 || cfg.input_h == 0 || cfg.input_w == 0 || cfg.n_classes < 2)
    throw Error(Errc::BadConfig, "model dimensions must be positive with at least 2 classes");
  if (cfg.stage_widths.empty()) throw Error(Errc::BadConfig, "need at least one stage");
  for (std::size_t i = 0; i < cfg.stage_widths.size(); ++i) {
    if (cfg.stage_widths[i] == 0) throw Error(Errc::BadConfig, "stage widths must be positive");
    if (i > 0 && cfg.stage_widths[i] < cfg.stage_widths[i - 1])
      throw Error(Errc::BadConfig, "stage widths must be non-decreasing");
  }
  if (cfg.blocks_per_stage == 0) throw Error(Errc::BadConfig, "blocks_per_stage must be >= 1");
}

nlohmann::json to_json(const ModelConfig& cfg) {
  return {{"in_channels", cfg.in_channels},   {"input_h", cfg.input_h},
          {"input_w", cfg.input_w},           {"stage_widths", cfg.stage_widths},
          {"blocks_per_stage", cfg.blocks_per_stage}, {"n_classes", cfg.n_classes}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  try {
    cfg.in_channels = j.at("in_channels").get<std::size_t>();
    cfg.input_h = j.at("input_h").get<std::size_t>();
    cfg.input_w = j.at("input_w").get<std::size_t>();
    cfg.stage_widths = j.at("stage_widths").get<std::vector<std::size_t>>();
    cfg.blocks_per_stage = j.at("blocks_per_stage").get<std::size_t>();
    cfg.n_classes = j.at("n_classes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadFormat, std::string("bad model config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

void validate(const TrainConfig& cfg) {
  if (cfg.epochs == 0) throw Error(Errc::BadConfig, "epochs must be >= 1");
  if (cfg.batch_size == 0) throw Error(Errc::BadConfig, "batch_size must be >= 1");
  if (!(cfg.lr > 0.0)) throw Error(Errc::BadConfig, "lr must be positive");
}

Var<float> ConvBn::forward(const Var<float>& x, bool training) const {
  const Var<float> y = nn::conv2d(x, weight, Var<float>(), stride, pad);
  return nn::batch_norm2d(y, gamma, beta, stats, training);
}

Var<float> BasicBlock::forward(const Var<float>& x, bool training) const {
  Var<float> h = nn::relu(conv_a.forward(x, training));
  h = conv_b.forward(h, training);
  const Var<float> skip = has_projection ? projection.forward(x, training) : x;
  return nn::relu(nn::add(h, skip));
}

ResNet::ResNet(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  validate(cfg_);
  SplitMix64 rng(seed);
  const std::size_t w0 = cfg_.stage_widths.front();
  stem_ = make_conv_bn(cfg_.in_channels, w0, 7, 2, 3, rng);
  std::size_t in = w0;
  for (std::size_t s = 0; s < cfg_.stage_widths.size(); ++s) {
    const std::size_t width = cfg_.stage_widths[s];
    std::vector<BasicBlock> blocks;
    for (std::size_t k = 0; k < cfg_.blocks_per_stage; ++k) {
      const std::size_t stride = (s > 0 && k == 0) ? 2 : 1;
      BasicBlock block;
      block.conv_a = make_conv_bn(in, width, 3, stride, 1, rng);
      block.conv_b = make_conv_bn(width, width, 3, 1, 1, rng);
      block.has_projection = stride != 1 || in != width;
      if (block.has_projection) block.projection = make_conv_bn(in, width, 1, stride, 0, rng);
      blocks.push_back(std::move(block));
      in = width;
    }
    stages_.push_back(std::move(blocks));
  }
  fc_weight_ = kaiming_uniform({cfg_.n_classes, in}, in, rng);
  fc_bias_ = Var<float>(Tensor<float>({cfg_.n_classes}, 0.0f), true);
}

Var<float> ResNet::run(const Var<float>& x, bool training, std::vector<Shape>* trace) const {
  const auto& d = x.dims();
  if (d.size() != 4 || d[1] != cfg_.in_channels || d[2] != cfg_.input_h || d[3] != cfg_.input_w)
    throw Error(Errc::ShapeMismatch, "model expects [B," + std::to_string(cfg_.in_channels) + "," +
                                         std::to_string(cfg_.input_h) + "," + std::to_string(cfg_.input_w) +
                                         "], got " + nn::shape_string(d));
  Var<float> h = nn::relu(stem_.forward(x, training));
  if (trace) trace->push_back(h.dims());
  h = nn::max_pool2d(h, 3, 2, 1);
  if (trace) trace->push_back(h.dims());
  for (const auto& stage : stages_) {
    for (const auto& block : stage) h = block.forward(h, training);
    if (trace) trace->push_back(h.dims());
  }
  h = nn::global_avg_pool(h);
  const Var<float> logits = nn::linear(h, fc_weight_, fc_bias_);
  if (trace) trace->push_back(logits.dims());
  return logits;
}

Var<float> ResNet::forward_train(const Var<float>& x) { return run(x, true, nullptr); }

Var<float> ResNet::forward_eval(const Var<float>& x) const { return run(x, false, nullptr); }

std::vector<Shape> ResNet::trace_shapes(const Shape& input) const {
  nn::NoGradGuard guard;
  std::vector<Shape> trace;
  run(Var<float>(Tensor<float>(input)), false, &trace);
  return trace;
}

std::vector<Var<float>> ResNet::parameters() const {
  std::vector<Var<float>> out;
  auto add = [&](const ConvBn& l) {
    out.push_back(l.weight);
    out.push_back(l.gamma);
    out.push_back(l.beta);
  };
  add(stem_);
  for (const auto& stage : stages_)
    for (const auto& block : stage) {
      add(block.conv_a);
      add(block.conv_b);
      if (block.has_projection) add(block.projection);
    }
  out.push_back(fc_weight_);
  out.push_back(fc_bias_);
  return out;
}

std::size_t ResNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.value().size();
  return n;
}

std::vector<NamedTensor> ResNet::named_tensors() {
  std::vector<NamedTensor> out;
  append_conv_bn(out, "stem.conv", stem_);
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (std::size_t k = 0; k < stages_[s].size(); ++k) {
      auto& block = stages_[s][k];
      const std::string prefix = "layer" + std::to_string(s + 1) + "." + std::to_string(k);
      append_conv_bn(out, prefix + ".conv_a", block.conv_a);
      append_conv_bn(out, prefix + ".conv_b", block.conv_b);
      if (block.has_projection) append_conv_bn(out, prefix + ".projection", block.projection);
    }
  }
  out.push_back({"fc.weight", &fc_weight_.mutable_value()});
  out.push_back({"fc.bias", &fc_bias_.mutable_value()});
  return out;
}

bool ResNet::head_is_zero() const {
  const auto zero = [](const Tensor<float>& t) {
    return std::all_of(t.values().begin(), t.values().end(), [](float v) { return v == 0.0f; });
  };
  return zero(fc_weight_.value()) && zero(fc_bias_.value());
}

void ResNet::zero_head() {
  fc_weight_.mutable_value().fill(0.0f);
  fc_bias_.mutable_value().fill(0.0f);
}

const BasicBlock& ResNet::block(std::size_t stage, std::size_t index) const { return stages_.at(stage).at(index); }
BasicBlock& ResNet::block(std::size_t stage, std::size_t index) { return stages_.at(stage).at(index); }

Tensor<float> batch_tensor(std::span<const Scalogram* const> items, const ModelConfig& cfg) {
  if (items.empty()) throw Error(Errc::EmptyDataset, "empty batch");
  const std::size_t per = cfg.in_channels * cfg.input_h * cfg.input_w;
  Tensor<float> t({items.size(), cfg.in_channels, cfg.input_h, cfg.input_w});
  for (std::size_t b = 0; b < items.size(); ++b) {
    const Scalogram& s = *items[b];
    if (s.n_channels != cfg.in_channels || s.n_scales != cfg.input_h || s.n_times != cfg.input_w ||
        s.values.size() != per)
      throw Error(Errc::ShapeMismatch, "scalogram " + s.subject_id + "#" + std::to_string(s.segment_index) +
                                           " is " + std::to_string(s.n_channels) + "x" +
                                           std::to_string(s.n_scales) + "x" + std::to_string(s.n_times) +
                                           ", model expects " + std::to_string(cfg.in_channels) + "x" +
                                           std::to_string(cfg.input_h) + "x" + std::to_string(cfg.input_w));
    std::copy(s.values.begin(), s.values.end(), t.data() + b * per);
  }
  return t;
}

TrainResult train(ResNet& model, const std::vector<Scalogram>& train_set, const TrainConfig& cfg) {
  validate(cfg);
  if (train_set.empty()) throw Error(Errc::EmptyDataset, "training set is empty");
  bool seen[2] = {false, false};
  for (const auto& s : train_set) {
    if (s.label != Label::Control && s.label != Label::Adhd)
      throw Error(Errc::BadLabel, "training scalogram " + s.subject_id + " has no label");
    seen[static_cast<int>(s.label)] = true;
  }
  if (!seen[0] || !seen[1]) throw Error(Errc::SingleClassDataset, "training set needs both labels");

  auto params = model.parameters();
  std::vector<Tensor<float>*> param_values;
  std::vector<const Tensor<float>*> param_grads;
  for (auto& p : params) param_values.push_back(&p.mutable_value());
  nn::AdamState<float> adam;
  const nn::AdamConfig adam_cfg{cfg.lr, 0.9, 0.999, 1e-8};

  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg.shuffle) {
      SplitMix64 rng(derive_seed(cfg.seed, 0x5EED, epoch));
      shuffle(order.begin(), order.end(), rng);
    }
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<const Scalogram*> items;
      std::vector<int> labels;
      for (std::size_t i = start; i < end; ++i) {
        items.push_back(&train_set[order[i]]);
        labels.push_back(static_cast<int>(train_set[order[i]].label));
      }
      const Var<float> x(batch_tensor(items, model.config()));
      const Var<float> logits = model.forward_train(x);
      const Var<float> loss = nn::cross_entropy(logits, labels);
      for (auto& p : params) p.zero_grad();
      nn::backward(loss);
      if (param_grads.empty())
        for (auto& p : params) param_grads.push_back(&p.grad());
      nn::adam_update(param_values, param_grads, adam, adam_cfg);

      loss_sum += static_cast<double>(loss.value()[0]) * static_cast<double>(labels.size());
      const auto& lv = logits.value();
      const std::size_t k = model.config().n_classes;
      for (std::size_t b = 0; b < labels.size(); ++b) {
        const float* row = lv.data() + b * k;
        const auto pred = static_cast<int>(std::max_element(row, row + k) - row);
        if (pred == labels[b]) ++correct;
      }
    }
    const double n = static_cast<double>(train_set.size());
    result.log.push_back({epoch + 1, loss_sum / n, static_cast<double>(correct) / n});
  }
  return result;
}

std::vector<Probabilities> predict_proba(const ResNet& model, std::span<const Scalogram> items) {
  nn::NoGradGuard guard;
  std::vector<Probabilities> out;
  out.reserve(items.size());
  const std::size_t k = model.config().n_classes;
  if (k != 2) throw Error(Errc::BadConfig, "binary classifier expected");
  for (std::size_t start = 0; start < items.size(); start += kPredictBatch) {
    const std::size_t end = std::min(items.size(), start + kPredictBatch);
    std::vector<const Scalogram*> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(&items[i]);
    const Var<float> logits = model.forward_eval(Var<float>(batch_tensor(batch, model.config())));
    const Var<float> probs = nn::softmax(logits);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      // Renormalize in double so p0 + p1 == 1 to double precision.
      const double p0 = probs.value()[b * 2];
      const double p1 = probs.value()[b * 2 + 1];
      out.push_back({p0 / (p0 + p1), p1 / (p0 + p1)});
    }
  }
  return out;
}

Probabilities predict_proba(const ResNet& model, const Scalogram& s) {
  return predict_proba(model, std::span<const Scalogram>(&s, 1)).front();
}

int label_from_proba(const Probabilities& p) { return p[1] > p[0] ? 1 : 0; }

int predict_label(const ResNet& model, const Scalogram& s) { return label_from_proba(predict_proba(model, s)); }

std::vector<int> predict_labels(const ResNet& model, std::span<const Scalogram> items) {
  std::vector<int> out;
  for (const auto& p : predict_proba(model, items)) out.push_back(label_from_proba(p));
  return out;
}

std::string training_log_jsonl(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  for (const auto& e : log) {
    out << nlohmann::json{{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"train_acc", e.train_acc}}.dump()
        << '\n';
  }
  return out.str();
}

}  // namespace eegscreen
