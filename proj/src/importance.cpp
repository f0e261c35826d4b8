#include "eegscreen/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "eegscreen/error.hpp"
#include "eegscreen/rng.hpp"

namespace eegscreen {

std::string_view to_string(PerturbMode mode) { return mode == PerturbMode::Shuffle ? "shuffle" : "noise"; }

PerturbMode parse_perturb_mode(std::string_view text) {
  if (text == "shuffle") return PerturbMode::Shuffle;
  if (text == "noise") return PerturbMode::Noise;
  throw Error(Errc::BadConfig, "mode must be shuffle or noise, got " + std::string(text));
}

BatchPredictor predictor_for(const ResNet& model) {
  return [&model](std::span<const Scalogram> items) { return predict_labels(model, items); };
}

std::vector<Scalogram> permute_channel(const std::vector<Scalogram>& test_set, Channel c, PerturbMode mode,
                                       std::uint64_t seed) {
  if (test_set.empty()) throw Error(Errc::EmptyTestSet, "nothing to perturb");
  const std::size_t ci = index_of(c);
  std::vector<Scalogram> out = test_set;
  SplitMix64 rng(seed);
  if (mode == PerturbMode::Shuffle) {
    std::vector<std::size_t> order(test_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto src = test_set[order[i]].plane(ci);
      auto dst = out[i].plane(ci);
      if (src.size() != dst.size()) throw Error(Errc::ShapeMismatch, "test scalograms differ in shape");
      std::copy(src.begin(), src.end(), dst.begin());
    }
  } else {
    for (auto& s : out)
      for (float& v : s.plane(ci)) v = static_cast<float>(rng.normal());
  }
  return out;
}

double accuracy(const BatchPredictor& predict, std::span<const Scalogram> test_set) {
  if (test_set.empty()) throw Error(Errc::EmptyTestSet, "cannot score an empty test set");
  const auto preds = predict(test_set);
  if (preds.size() != test_set.size()) throw Error(Errc::LengthMismatch, "predictor returned the wrong count");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == static_cast<int>(test_set[i].label) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(test_set.size());
}

const ChannelImportance& ImportanceResult::at(Channel c) const {
  for (const auto& ci : per_channel)
    if (ci.channel == c) return ci;
  throw Error(Errc::BadConfig, "channel missing from importance result");
}

std::vector<Channel> ImportanceResult::ranking() const {
  std::vector<Channel> out;
  for (const auto& ci : per_channel) out.push_back(ci.channel);
  return out;
}

ImportanceResult channel_importance(const BatchPredictor& predict, const std::vector<Scalogram>& test_set,
                                    std::size_t repeats, PerturbMode mode, std::uint64_t seed) {
  if (test_set.empty()) throw Error(Errc::EmptyTestSet, "importance needs test samples");
  if (mode == PerturbMode::Shuffle && test_set.size() < 2)
    throw Error(Errc::EmptyTestSet, "shuffle mode needs at least 2 test samples");
  if (repeats == 0) throw Error(Errc::BadConfig, "repeats must be >= 1");

  ImportanceResult result;
  result.mode = mode;
  result.seed = seed;
  result.repeats = repeats;
  result.baseline_accuracy = accuracy(predict, test_set);
  for (Channel c : kCanonicalChannels) {
    std::vector<double> drops;
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto perturbed = permute_channel(test_set, c, mode, derive_seed(seed, index_of(c), r));
      drops.push_back(result.baseline_accuracy - accuracy(predict, perturbed));
    }
    const double mean = std::accumulate(drops.begin(), drops.end(), 0.0) / static_cast<double>(repeats);
    double var = 0.0;
    for (double d : drops) var += (d - mean) * (d - mean);
    result.per_channel.push_back({c, mean, std::sqrt(var / static_cast<double>(repeats)), repeats});
  }
  std::stable_sort(result.per_channel.begin(), result.per_channel.end(),
                   [](const ChannelImportance& a, const ChannelImportance& b) { return a.mean_drop > b.mean_drop; });
  return result;
}

ImportanceResult channel_importance(const ResNet& model, const std::vector<Scalogram>& test_set,
                                    std::size_t repeats, PerturbMode mode, std::uint64_t seed) {
  if (model.head_is_zero()) throw Error(Errc::UntrainedModel, "final layer is all zero");
  return channel_importance(predictor_for(model), test_set, repeats, mode, seed);
}

nlohmann::json to_json(const ImportanceResult& r) {
  nlohmann::json channels = nlohmann::json::object();
  nlohmann::json ranking = nlohmann::json::array();
  for (const auto& ci : r.per_channel) {
    const std::string name(channel_name(ci.channel));
    channels[name] = {{"mean_drop", ci.mean_drop}, {"std_drop", ci.std_drop}, {"repeats", ci.repeats}};
    ranking.push_back(name);
  }
  return {{"baseline_accuracy", r.baseline_accuracy},
          {"mode", std::string(to_string(r.mode))},
          {"seed", r.seed},
          {"repeats", r.repeats},
          {"per_channel", channels},
          {"ranking", ranking}};
}

std::string importance_csv(const ImportanceResult& r) {
  std::ostringstream out;
  out.precision(17);
  out << "channel,mean_drop,std_drop\n";
  for (const auto& ci : r.per_channel) out << channel_name(ci.channel) << ',' << ci.mean_drop << ',' << ci.std_drop << '\n';
  return out.str();
}

}  // namespace eegscreen
