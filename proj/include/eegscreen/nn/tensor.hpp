#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace eegscreen::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& dims);
std::string shape_string(const Shape& dims);

// Dense row-major tensor.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape dims, T fill = T(0));
  Tensor(Shape dims, std::vector<T> values);

  const Shape& dims() const { return dims_; }
  std::size_t dim(std::size_t i) const { return dims_.at(i); }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }
  std::vector<T>& storage() { return values_; }

  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  void fill(T v);
  bool operator==(const Tensor&) const = default;

 private:
  Shape dims_;
  std::vector<T> values_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace eegscreen::nn
