#pragma once

#include <cstdint>
#include <vector>

#include "eegscreen/nn/tensor.hpp"

namespace eegscreen::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment estimates, one pair per parameter tensor. Empty until
// the first step.
template <typename T>
struct AdamState {
  std::uint64_t step = 0;
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
};

template <typename T>
struct AdamResult {
  std::vector<Tensor<T>> params;
  AdamState<T> state;
};

// Bias-corrected Adam as a pure function of its inputs.
// Throws Error(ShapeMismatch) when params, grads and state disagree.
template <typename T>
AdamResult<T> adam_step(const std::vector<Tensor<T>>& params, const std::vector<Tensor<T>>& grads,
                        const AdamState<T>& state, const AdamConfig& cfg = {});

// Same update applied in place; the training loop uses this form.
template <typename T>
void adam_update(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads,
                 AdamState<T>& state, const AdamConfig& cfg = {});

}  // namespace eegscreen::nn
