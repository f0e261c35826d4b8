#include "eegscreen/nn/adam.hpp"

#include <cmath>

#include "eegscreen/error.hpp"

namespace eegscreen::nn {

template <typename T>
void adam_update(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads,
                 AdamState<T>& state, const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw Error(Errc::ShapeMismatch, "adam: one gradient per parameter required");
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.emplace_back(p->dims(), T(0));
      state.v.emplace_back(p->dims(), T(0));
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw Error(Errc::ShapeMismatch, "adam: state does not match parameter count");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->dims() != grads[i]->dims() || params[i]->dims() != state.m[i].dims() ||
        params[i]->dims() != state.v[i].dims())
      throw Error(Errc::ShapeMismatch, "adam: shape mismatch for parameter " + std::to_string(i));
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = *params[i];
    const Tensor<T>& g = *grads[i];
    Tensor<T>& m = state.m[i];
    Tensor<T>& v = state.v[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g[k];
      const double mk = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * gk;
      const double vk = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * gk * gk;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      p[k] = static_cast<T>(p[k] - cfg.lr * (mk / c1) / (std::sqrt(vk / c2) + cfg.eps));
    }
  }
}

template <typename T>
AdamResult<T> adam_step(const std::vector<Tensor<T>>& params, const std::vector<Tensor<T>>& grads,
                        const AdamState<T>& state, const AdamConfig& cfg) {
  AdamResult<T> result{params, state};
  std::vector<Tensor<T>*> ps;
  std::vector<const Tensor<T>*> gs;
  for (auto& p : result.params) ps.push_back(&p);
  for (const auto& g : grads) gs.push_back(&g);
  adam_update(ps, gs, result.state, cfg);
  return result;
}

template void adam_update(const std::vector<Tensor<float>*>&, const std::vector<const Tensor<float>*>&,
                          AdamState<float>&, const AdamConfig&);
template void adam_update(const std::vector<Tensor<double>*>&, const std::vector<const Tensor<double>*>&,
                          AdamState<double>&, const AdamConfig&);
template AdamResult<float> adam_step(const std::vector<Tensor<float>>&, const std::vector<Tensor<float>>&,
                                     const AdamState<float>&, const AdamConfig&);
template AdamResult<double> adam_step(const std::vector<Tensor<double>>&, const std::vector<Tensor<double>>&,
                                      const AdamState<double>&, const AdamConfig&);

}  // namespace eegscreen::nn
