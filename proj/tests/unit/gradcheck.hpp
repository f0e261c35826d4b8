#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "eegscreen/nn/ops.hpp"

namespace testing {

using eegscreen::nn::Shape;
using eegscreen::nn::Tensor;
using eegscreen::nn::Var;

using ScalarFn = std::function<Var<double>(const std::vector<Var<double>>&)>;

// Worst relative error between reverse-mode gradients and central finite
// differences (double precision). Each element's error is divided by
// max(|analytic|, |numeric|), floored at 1e-3 of the largest gradient
// magnitude of that input so exact zeros do not divide by zero.
inline double max_grad_error(const std::vector<Tensor<double>>& inputs, const ScalarFn& f, double eps = 1e-5) {
  std::vector<Var<double>> vars;
  for (const auto& t : inputs) vars.emplace_back(t, true);
  eegscreen::nn::backward(f(vars));

  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor<double> analytic = vars[k].grad();
    std::vector<double> numeric(inputs[k].size());
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      auto eval = [&](double delta) {
        eegscreen::nn::NoGradGuard guard;
        std::vector<Var<double>> probe;
        for (std::size_t j = 0; j < inputs.size(); ++j) {
          Tensor<double> t = inputs[j];
          if (j == k) t[i] += delta;
          probe.emplace_back(std::move(t));
        }
        return f(probe).value()[0];
      };
      numeric[i] = (eval(eps) - eval(-eps)) / (2 * eps);
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i)
      scale = std::max({scale, std::abs(numeric[i]), std::abs(analytic[i])});
    const double floor = std::max(1e-3 * scale, 1e-12);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      const double denom = std::max({std::abs(numeric[i]), std::abs(analytic[i]), floor});
      worst = std::max(worst, std::abs(numeric[i] - analytic[i]) / denom);
    }
  }
  return worst;
}

class ShapeRng {
 public:
  explicit ShapeRng(unsigned seed) : gen_(seed) {}
  std::size_t dim(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(gen_); }
  Tensor<double> normal(const Shape& s, double sd = 1.0) {
    Tensor<double> t(s);
    std::normal_distribution<double> d(0.0, sd);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = d(gen_);
    return t;
  }
  // Distinct values at least 0.02 apart, away from zero, so max/relu kinks
  // are never within eps of a probe.
  Tensor<double> separated(const Shape& s) {
    Tensor<double> t(s);
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (double(i) + 0.5) * 0.02 * (i % 2 ? 1.0 : -1.0);
    std::shuffle(v.begin(), v.end(), gen_);
    for (std::size_t i = 0; i < v.size(); ++i) t[i] = v[i];
    return t;
  }
  std::vector<int> labels(std::size_t n, int k) {
    std::vector<int> out(n);
    for (auto& l : out) l = std::uniform_int_distribution<int>(0, k - 1)(gen_);
    return out;
  }
  std::mt19937& gen() { return gen_; }

 private:
  std::mt19937 gen_;
};

// Projects an op output to a scalar with fixed random weights so every
// output element contributes a distinct gradient.
inline ScalarFn projected(std::function<Var<double>(const std::vector<Var<double>>&)> op, Tensor<double> coeffs) {
  return [op, coeffs](const std::vector<Var<double>>& v) { return eegscreen::nn::weighted_sum(op(v), coeffs); };
}

struct GradCase {
  std::vector<Tensor<double>> inputs;
  ScalarFn fn;
};

// 'shapes' random configurations for every layer kind, keyed by kind name.
inline std::map<std::string, std::vector<GradCase>> gradient_cases(unsigned seed, std::size_t shapes = 10) {
  namespace nn = eegscreen::nn;
  ShapeRng r(seed);
  std::map<std::string, std::vector<GradCase>> out;
  for (std::size_t n = 0; n < shapes; ++n) {
    {  // conv2d with bias
      const std::size_t b = r.dim(1, 2), c = r.dim(1, 3), o = r.dim(1, 3), k = r.dim(1, 3), stride = r.dim(1, 2),
                        pad = r.dim(0, k / 2 + 1), h = r.dim(k, 6), w = r.dim(k, 6);
      const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (w + 2 * pad - k) / stride + 1;
      out["conv2d"].push_back({{r.normal({b, c, h, w}), r.normal({o, c, k, k}), r.normal({o})},
                               projected([=](const auto& v) { return nn::conv2d(v[0], v[1], v[2], stride, pad); },
                                         r.normal({b, o, oh, ow}))});
    }
    {  // batch norm, training mode
      const std::size_t b = r.dim(2, 3), c = r.dim(1, 3), h = r.dim(1, 4), w = r.dim(1, 4);
      auto stats = std::make_shared<nn::BatchNormStats<double>>(c);
      out["batch_norm2d_train"].push_back(
          {{r.normal({b, c, h, w}, 2.0), r.normal({c}), r.normal({c})},
           projected([=](const auto& v) { return nn::batch_norm2d(v[0], v[1], v[2], *stats, true); },
                     r.normal({b, c, h, w}))});
    }
    {  // batch norm, eval mode with non-trivial running stats
      const std::size_t b = r.dim(1, 3), c = r.dim(1, 3), h = r.dim(1, 4), w = r.dim(1, 4);
      auto stats = std::make_shared<nn::BatchNormStats<double>>(c);
      for (std::size_t i = 0; i < c; ++i) {
        stats->running_mean[i] = 0.3 * double(i) - 0.2;
        stats->running_var[i] = 0.5 + double(i);
      }
      out["batch_norm2d_eval"].push_back(
          {{r.normal({b, c, h, w}), r.normal({c}), r.normal({c})},
           projected([=](const auto& v) { return nn::batch_norm2d(v[0], v[1], v[2], *stats, false); },
                     r.normal({b, c, h, w}))});
    }
    {
      const Shape s = {r.dim(1, 3), r.dim(1, 3), r.dim(1, 4), r.dim(1, 4)};
      out["relu"].push_back({{r.separated(s)}, projected([](const auto& v) { return nn::relu(v[0]); }, r.normal(s))});
    }
    {
      const std::size_t k = r.dim(2, 3), stride = r.dim(1, 2), pad = r.dim(0, k / 2);
      const std::size_t b = r.dim(1, 2), c = r.dim(1, 2), h = r.dim(k, 7), w = r.dim(k, 7);
      const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (w + 2 * pad - k) / stride + 1;
      out["max_pool2d"].push_back({{r.separated({b, c, h, w})},
                                   projected([=](const auto& v) { return nn::max_pool2d(v[0], k, stride, pad); },
                                             r.normal({b, c, oh, ow}))});
    }
    {
      const std::size_t b = r.dim(1, 3), c = r.dim(1, 4);
      out["global_avg_pool"].push_back({{r.normal({b, c, r.dim(1, 4), r.dim(1, 4)})},
                                        projected([](const auto& v) { return nn::global_avg_pool(v[0]); },
                                                  r.normal({b, c}))});
    }
    {
      const std::size_t b = r.dim(1, 4), in = r.dim(1, 6), o = r.dim(1, 4);
      out["linear"].push_back({{r.normal({b, in}), r.normal({o, in}), r.normal({o})},
                               projected([](const auto& v) { return nn::linear(v[0], v[1], v[2]); },
                                         r.normal({b, o}))});
    }
    {
      const Shape s = {r.dim(1, 3), r.dim(1, 5)};
      out["add"].push_back({{r.normal(s), r.normal(s)},
                            projected([](const auto& v) { return nn::add(v[0], v[1]); }, r.normal(s))});
      out["mul"].push_back({{r.normal(s), r.normal(s)},
                            projected([](const auto& v) { return nn::mul(v[0], v[1]); }, r.normal(s))});
      out["sum"].push_back({{r.normal(s)}, [](const auto& v) { return nn::sum(v[0]); }});
    }
    {
      const std::size_t b = r.dim(1, 4), k = r.dim(2, 4);
      out["softmax"].push_back({{r.normal({b, k}, 2.0)},
                                projected([](const auto& v) { return nn::softmax(v[0]); }, r.normal({b, k}))});
      const auto labels = r.labels(b, static_cast<int>(k));
      out["cross_entropy"].push_back(
          {{r.normal({b, k}, 2.0)}, [labels](const auto& v) { return nn::cross_entropy(v[0], labels); }});
    }
    {  // small residual net end to end
      const std::size_t b = 2, c = r.dim(1, 2), h = r.dim(4, 6), w = r.dim(4, 6), f = r.dim(2, 3);
      auto s1 = std::make_shared<nn::BatchNormStats<double>>(f);
      const auto labels = r.labels(b, 2);
      out["small_net"].push_back(
          {{r.normal({b, c, h, w}), r.normal({f, c, 3, 3}, 0.5), r.normal({f}), r.normal({f}),
            r.normal({f, f, 3, 3}, 0.5), r.normal({2, f}), r.normal({2})},
           [=](const auto& v) {
             auto y = nn::relu(nn::batch_norm2d(nn::conv2d(v[0], v[1], Var<double>(), 1, 1), v[2], v[3], *s1, true));
             y = nn::add(y, nn::conv2d(y, v[4], Var<double>(), 1, 1));
             y = nn::max_pool2d(y, 2, 2, 0);
             return nn::cross_entropy(nn::linear(nn::global_avg_pool(y), v[5], v[6]), labels);
           }});
    }
  }
  return out;
}

}  // namespace testing
