#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eegscreen/cwt.hpp"
#include "eegscreen/nn/adam.hpp"
#include "eegscreen/nn/ops.hpp"

namespace eegscreen {

using nn::Shape;
using nn::Tensor;
using nn::Var;

struct ModelConfig {
  std::size_t in_channels = kNumChannels;
  std::size_t input_h = 64;  // scales
  std::size_t input_w = kTimeBins;
  std::vector<std::size_t> stage_widths = {64, 128, 256, 512};
  std::size_t blocks_per_stage = 2;
  std::size_t n_classes = 2;

  // Stage widths (64, 128, 256, 512) scaled by `factor`, rounded, at least 1.
  static ModelConfig with_width_factor(double factor, std::size_t input_h = 64, std::size_t input_w = kTimeBins);
};

void validate(const ModelConfig& cfg);
nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

void validate(const TrainConfig& cfg);

struct EpochLog {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double train_acc = 0.0;
};

// Conv + batch norm pair with its running statistics.
struct ConvBn {
  Var<float> weight;
  Var<float> gamma;
  Var<float> beta;
  mutable nn::BatchNormStats<float> stats;
  std::size_t stride = 1;
  std::size_t pad = 0;

  Var<float> forward(const Var<float>& x, bool training) const;
};

// conv3x3-BN-ReLU-conv3x3-BN plus identity or 1x1 projection skip, then ReLU.
struct BasicBlock {
  ConvBn conv_a;
  ConvBn conv_b;
  bool has_projection = false;
  ConvBn projection;

  Var<float> forward(const Var<float>& x, bool training) const;
};

struct NamedTensor {
  std::string name;
  Tensor<float>* tensor;
};

// ResNet-18 layout over [B, channels, scales, time] scalogram tensors: 7x7/2
// stem, 3x3/2 max pool, four stages of basic blocks, global average pool and
// a linear head.
class ResNet {
 public:
  ResNet(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }

  // Training mode updates batch-norm running statistics.
  Var<float> forward_train(const Var<float>& x);
  Var<float> forward_eval(const Var<float>& x) const;

  // Output shape after the stem, the pool and each stage, for a given input.
  std::vector<Shape> trace_shapes(const Shape& input) const;

  std::vector<Var<float>> parameters() const;
  std::size_t parameter_count() const;

  // Every persistent tensor (parameters and running statistics) in a fixed
  // order with stable names.
  std::vector<NamedTensor> named_tensors();

  // Heuristic for an untrained head: every weight and bias of the final
  // linear layer is exactly zero.
  bool head_is_zero() const;
  void zero_head();

  const BasicBlock& block(std::size_t stage, std::size_t index) const;
  BasicBlock& block(std::size_t stage, std::size_t index);

 private:
  Var<float> run(const Var<float>& x, bool training, std::vector<Shape>* trace) const;

  ModelConfig cfg_;
  ConvBn stem_;
  std::vector<std::vector<BasicBlock>> stages_;
  Var<float> fc_weight_;
  Var<float> fc_bias_;
};

// Stacks scalograms into [B, C, S, T]. Throws Error(ShapeMismatch) when a
// scalogram does not match the model input.
Tensor<float> batch_tensor(std::span<const Scalogram* const> items, const ModelConfig& cfg);

struct TrainResult {
  std::vector<EpochLog> log;
};

// Seeded mini-batch Adam on cross-entropy. Deterministic for a fixed seed.
// Throws Error(EmptyDataset | SingleClassDataset | BadLabel | ShapeMismatch).
TrainResult train(ResNet& model, const std::vector<Scalogram>& train_set, const TrainConfig& cfg);

using Probabilities = std::array<double, 2>;

// Softmax of eval-mode logits, computed in batches.
std::vector<Probabilities> predict_proba(const ResNet& model, std::span<const Scalogram> items);
Probabilities predict_proba(const ResNet& model, const Scalogram& s);

// Argmax; an exact tie goes to class 0 (control).
int label_from_proba(const Probabilities& p);
int predict_label(const ResNet& model, const Scalogram& s);
std::vector<int> predict_labels(const ResNet& model, std::span<const Scalogram> items);

// JSON-lines, one record per epoch.
std::string training_log_jsonl(const std::vector<EpochLog>& log);

}  // namespace eegscreen
