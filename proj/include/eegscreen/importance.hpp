#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eegscreen/channels.hpp"
#include "eegscreen/classifier.hpp"

namespace eegscreen {

// Shuffle swaps a channel's planes between test samples (keeps the marginal
// distribution); Noise overwrites them with standard-normal values.
enum class PerturbMode { Shuffle, Noise };

std::string_view to_string(PerturbMode mode);
PerturbMode parse_perturb_mode(std::string_view text);

using BatchPredictor = std::function<std::vector<int>(std::span<const Scalogram>)>;

BatchPredictor predictor_for(const ResNet& model);

// Copy of the test set with channel c perturbed; every other plane is
// untouched. The shuffle may leave samples in place.
// Throws Error(EmptyTestSet).
std::vector<Scalogram> permute_channel(const std::vector<Scalogram>& test_set, Channel c, PerturbMode mode,
                                       std::uint64_t seed);

double accuracy(const BatchPredictor& predict, std::span<const Scalogram> test_set);

struct ChannelImportance {
  Channel channel = Channel::Fz;
  double mean_drop = 0.0;
  double std_drop = 0.0;  // population std over repeats
  std::size_t repeats = 0;
};

struct ImportanceResult {
  double baseline_accuracy = 0.0;
  std::vector<ChannelImportance> per_channel;  // sorted by mean_drop, largest first
  PerturbMode mode = PerturbMode::Shuffle;
  std::uint64_t seed = 0;
  std::size_t repeats = 0;

  const ChannelImportance& at(Channel c) const;
  std::vector<Channel> ranking() const;
};

// Accuracy drop per channel, averaged over `repeats` independent
// perturbations. Throws Error(EmptyTestSet) for an empty set (or fewer than 2
// samples in shuffle mode) and Error(BadConfig) for repeats == 0.
ImportanceResult channel_importance(const BatchPredictor& predict, const std::vector<Scalogram>& test_set,
                                    std::size_t repeats = 19, PerturbMode mode = PerturbMode::Shuffle,
                                    std::uint64_t seed = 0);

// As above; also throws Error(UntrainedModel) when the model head is all zero.
ImportanceResult channel_importance(const ResNet& model, const std::vector<Scalogram>& test_set,
                                    std::size_t repeats = 19, PerturbMode mode = PerturbMode::Shuffle,
                                    std::uint64_t seed = 0);

nlohmann::json to_json(const ImportanceResult& r);

// "channel,mean_drop,std_drop" rows in ranking order, for bar charts.
std::string importance_csv(const ImportanceResult& r);

}  // namespace eegscreen
