#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "eegscreen/classifier.hpp"
#include "eegscreen/weights_io.hpp"
#include "helpers.hpp"
#include "planted.hpp"

using namespace eegscreen;
using testing::error_code_of;

namespace {

ModelConfig small_config() {
  ModelConfig c = ModelConfig::with_width_factor(0.125, 16, 20);
  return c;
}

// Plain logistic regression by gradient descent: the oracle that the
// planted set is linearly separable.
double logistic_train_accuracy(const std::vector<Scalogram>& data) {
  const std::size_t d = data.front().values.size();
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  for (int it = 0; it < 200; ++it) {
    std::vector<double> gw(d, 0.0);
    double gb = 0.0;
    for (const auto& s : data) {
      double z = b;
      for (std::size_t i = 0; i < d; ++i) z += w[i] * s.values[i];
      const double err = 1.0 / (1.0 + std::exp(-z)) - (s.label == Label::Adhd ? 1.0 : 0.0);
      for (std::size_t i = 0; i < d; ++i) gw[i] += err * s.values[i];
      gb += err;
    }
    for (std::size_t i = 0; i < d; ++i) w[i] -= 0.01 * gw[i] / double(data.size());
    b -= 0.01 * gb / double(data.size());
  }
  std::size_t correct = 0;
  for (const auto& s : data) {
    double z = b;
    for (std::size_t i = 0; i < d; ++i) z += w[i] * s.values[i];
    correct += (z > 0) == (s.label == Label::Adhd);
  }
  return double(correct) / double(data.size());
}

}  // namespace

TEST_CASE("full-width shape chain") {
  const ResNet m(ModelConfig{}, 1);
  const auto t = m.trace_shapes({1, 19, 64, 100});
  REQUIRE(t.size() == 7);
  CHECK(t[0] == Shape{1, 64, 32, 50});
  CHECK(t[1] == Shape{1, 64, 16, 25});
  CHECK(t[2] == Shape{1, 64, 16, 25});
  CHECK(t[3] == Shape{1, 128, 8, 13});
  CHECK(t[4] == Shape{1, 256, 4, 7});
  CHECK(t[5] == Shape{1, 512, 2, 4});
  CHECK(t[6] == Shape{1, 2});
  // ResNet-18 on 19 input planes: the 3-channel reference count is 11,689,512
  // (with a 1000-way head); swapping the stem input and head changes it by a
  // known amount.
  const std::size_t reference = 11689512 - 64 * 3 * 49 + 64 * 19 * 49 - (512 * 1000 + 1000) + (512 * 2 + 2);
  CHECK(m.parameter_count() == reference);
}

TEST_CASE("width factor") {
  const ModelConfig q = ModelConfig::with_width_factor(0.25);
  CHECK(q.stage_widths == std::vector<std::size_t>{16, 32, 64, 128});
  const ResNet m(q, 1);
  const auto names = const_cast<ResNet&>(m).named_tensors();
  CHECK(names.back().name == "fc.bias");
  bool found_fc = false;
  for (const auto& n : names)
    if (n.name == "fc.weight") {
      CHECK(n.tensor->dims() == Shape{2, 128});
      found_fc = true;
    }
  CHECK(found_fc);
  ModelConfig bad = q;
  bad.stage_widths = {32, 16, 64, 128};
  CHECK(error_code_of([&] { validate(bad); }) == Errc::BadConfig);
  bad = q;
  bad.blocks_per_stage = 0;
  CHECK(error_code_of([&] { ResNet r(bad, 1); }) == Errc::BadConfig);
}

TEST_CASE("zeroed residual branch leaves ReLU(input)") {
  ResNet m(small_config(), 3);
  BasicBlock& blk = m.block(0, 1);
  REQUIRE_FALSE(blk.has_projection);
  blk.conv_b.gamma.mutable_value().fill(0.0f);
  blk.conv_b.beta.mutable_value().fill(0.0f);
  std::mt19937 gen(1);
  Tensor<float> x({2, m.config().stage_widths[0], 4, 5});
  std::normal_distribution<float> d;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = d(gen);
  nn::NoGradGuard g;
  const auto y = blk.forward(Var<float>(x), false);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.value()[i] == std::max(0.0f, x[i]));
}

TEST_CASE("zero head predicts a tie, which goes to control") {
  ResNet m(small_config(), 4);
  CHECK_FALSE(m.head_is_zero());
  m.zero_head();
  CHECK(m.head_is_zero());
  const auto data = testing::planted_scalograms(3, 1);
  for (const auto& p : predict_proba(m, data)) {
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
  }
  CHECK(predict_label(m, data[0]) == 0);
  CHECK(label_from_proba({0.5, 0.5}) == 0);
  CHECK(label_from_proba({0.2, 0.8}) == 1);
}

TEST_CASE("probabilities sum to one and labels agree with argmax") {
  const ResNet m(small_config(), 5);
  const auto data = testing::planted_scalograms(20, 2);
  const auto probs = predict_proba(m, data);
  const auto labels = predict_labels(m, data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(std::abs(probs[i][0] + probs[i][1] - 1.0) <= 1e-6);
    CHECK(labels[i] == (probs[i][1] > probs[i][0] ? 1 : 0));
  }
  Scalogram wrong = data[0];
  wrong.n_scales = 8;
  wrong.values.resize(19 * 8 * 20);
  CHECK(error_code_of([&] { predict_proba(m, wrong); }) == Errc::ShapeMismatch);
}

TEST_CASE("training on a separable planted set") {
  const std::vector<Channel> signal{Channel::Fp1, Channel::Fp2, Channel::O1, Channel::O2};
  const auto data = testing::planted_scalograms(64, 7, signal, 1.0, 32, 40);
  CHECK(logistic_train_accuracy(data) == 1.0);

  TrainConfig tc;
  tc.seed = 11;
  tc.batch_size = 16;
  const ModelConfig mc = ModelConfig::with_width_factor(0.25, 32, 40);
  ResNet a(mc, 9), b(mc, 9);
  const auto la = train(a, data, tc).log, lb = train(b, data, tc).log;
  REQUIRE(la.size() == 10);
  CHECK(la.back().train_acc == 1.0);
  CHECK(la[1].mean_loss < la[0].mean_loss);
  CHECK(la[2].mean_loss < la[1].mean_loss);
  for (std::size_t e = 0; e < la.size(); ++e) {
    CHECK(la[e].mean_loss == lb[e].mean_loss);
    CHECK(la[e].train_acc == lb[e].train_acc);
  }
  // 64 samples are memorised; held-out checks use a larger training set
  ResNet big(mc, 2);
  train(big, testing::planted_scalograms(192, 8, signal, 1.0, 32, 40), tc);
  const auto test = testing::planted_scalograms(32, 99, signal, 1.0, 32, 40);
  std::size_t correct = 0;
  for (const auto& s : test) {
    correct += predict_label(big, s) == static_cast<int>(s.label);
    if (s.label == Label::Adhd) CHECK(predict_proba(big, s)[1] > 0.9);
  }
  CHECK(correct >= 31);

  const std::string jsonl = training_log_jsonl(la);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 10);
  CHECK(jsonl.find("\"mean_loss\"") != std::string::npos);
}

TEST_CASE("training preconditions") {
  ResNet m(small_config(), 1);
  CHECK(error_code_of([&] { train(m, {}, TrainConfig{}); }) == Errc::EmptyDataset);
  auto ones = testing::planted_scalograms(4, 1);
  for (auto& s : ones) s.label = Label::Adhd;
  CHECK(error_code_of([&] { train(m, ones, TrainConfig{}); }) == Errc::SingleClassDataset);
  auto unknown = testing::planted_scalograms(4, 1);
  unknown[0].label = Label::Unknown;
  CHECK(error_code_of([&] { train(m, unknown, TrainConfig{}); }) == Errc::BadLabel);
  TrainConfig zero;
  zero.epochs = 0;
  CHECK(error_code_of([&] { validate(zero); }) == Errc::BadConfig);
}

TEST_CASE("WGTS round trip reproduces predictions bitwise") {
  auto data = testing::planted_scalograms(32, 3);
  ResNet m(small_config(), 2);
  TrainConfig tc;
  tc.epochs = 2;
  train(m, data, tc);
  std::stringstream buf;
  write_weights(buf, m, {{"note", "x"}});
  const std::string bytes = buf.str();
  CHECK(bytes.find("\"WGTS v1\"") != std::string::npos);
  CHECK(bytes.find(std::string("\n\0", 2)) != std::string::npos);
  const LoadedModel back = read_weights(buf);
  CHECK(back.metadata.at("note") == "x");
  const auto p1 = predict_proba(m, data), p2 = predict_proba(*back.model, data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(p1[i][0] == p2[i][0]);
    CHECK(p1[i][1] == p2[i][1]);
  }
  std::stringstream bad("{\"format\":\"nope\"}\n");
  CHECK(error_code_of([&] { read_weights(bad); }) == Errc::BadFormat);
}
