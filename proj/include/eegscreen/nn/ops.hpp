#pragma once

#include <cstddef>
#include <vector>

#include "eegscreen/nn/autograd.hpp"

namespace eegscreen::nn {

// Cross-correlation. x [B,C,H,W], weight [O,C,K,K], optional bias [O].
// Output [B,O,H',W'] with H' = floor((H + 2 pad - K) / stride) + 1.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, std::size_t stride, std::size_t pad);

template <typename T>
struct BatchNormStats {
  Tensor<T> running_mean;
  Tensor<T> running_var;

  explicit BatchNormStats(std::size_t channels = 1)
      : running_mean({channels}, T(0)), running_var({channels}, T(1)) {}
};

// Per-channel normalization of [B,C,H,W]. Training mode uses batch statistics
// (biased variance) and folds them into the running stats with the given
// momentum (unbiased variance); eval mode uses the running stats.
template <typename T>
Var<T> batch_norm2d(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, BatchNormStats<T>& stats,
                    bool training, double eps = 1e-5, double momentum = 0.1);

template <typename T>
Var<T> relu(const Var<T>& x);

// Padding cells never win; pad must not exceed kernel / 2.
template <typename T>
Var<T> max_pool2d(const Var<T>& x, std::size_t kernel, std::size_t stride, std::size_t pad);

// [B,C,H,W] -> [B,C]
template <typename T>
Var<T> global_avg_pool(const Var<T>& x);

// x [B,in], weight [out,in], optional bias [out] -> [B,out]
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> sum(const Var<T>& x);

// sum_i x_i * coeffs_i, coeffs treated as a constant.
template <typename T>
Var<T> weighted_sum(const Var<T>& x, const Tensor<T>& coeffs);

// Row-wise softmax of [B,K].
template <typename T>
Var<T> softmax(const Var<T>& x);

// Mean over the batch of -log softmax(logits)[label]; logits [B,K].
// Throws Error(BadLabel) for labels outside [0, K).
template <typename T>
Var<T> cross_entropy(const Var<T>& logits, const std::vector<int>& labels);

}  // namespace eegscreen::nn
