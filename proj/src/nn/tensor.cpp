#include "eegscreen/nn/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "eegscreen/error.hpp"

namespace eegscreen::nn {

std::size_t shape_size(const Shape& dims) {
  if (dims.empty()) return 0;
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

template <typename T>
Tensor<T>::Tensor(Shape dims, T fill) : dims_(std::move(dims)) {
  for (auto d : dims_)
    if (d == 0) throw Error(Errc::ShapeMismatch, "zero-sized dimension in " + shape_string(dims_));
  values_.assign(shape_size(dims_), fill);
}

template <typename T>
Tensor<T>::Tensor(Shape dims, std::vector<T> values) : dims_(std::move(dims)), values_(std::move(values)) {
  for (auto d : dims_)
    if (d == 0) throw Error(Errc::ShapeMismatch, "zero-sized dimension in " + shape_string(dims_));
  if (values_.size() != shape_size(dims_))
    throw Error(Errc::ShapeMismatch, std::to_string(values_.size()) + " values for shape " + shape_string(dims_));
}

template <typename T>
void Tensor<T>::fill(T v) {
  std::fill(values_.begin(), values_.end(), v);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace eegscreen::nn
