#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rtnet/substrate/error.hpp"

namespace rtnet {

// Dense row-major tensor. Rank 1 and 2 are the only ranks the models use,
// but the shape is kept general so checkpoints can describe anything.
template <class T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, T fill = T(0))
      : shape_(std::move(shape)), values_(element_count(shape_), fill) {}
  Tensor(std::vector<std::size_t> shape, std::vector<T> values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    require(values_.size() == element_count(shape_),
            "tensor value count does not match shape");
  }

  static std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_.front(); }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  std::span<T> span() { return values_; }
  std::span<const T> span() const { return values_; }
  std::vector<T>& values() { return values_; }
  const std::vector<T>& values() const { return values_; }

  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }
  T& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  const T& at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  std::span<T> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
  std::span<const T> row(std::size_t r) const {
    return {values_.data() + r * cols(), cols()};
  }

  void fill(T v) { std::fill(values_.begin(), values_.end(), v); }

 private:
  std::vector<std::size_t> shape_;
  std::vector<T> values_;
};

// A trainable tensor with its gradient accumulator.
template <class T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, std::vector<std::size_t> shape)
      : name(std::move(n)), value(shape), grad(shape) {}

  void zero_grad() { grad.fill(T(0)); }
  std::size_t size() const { return value.size(); }
};

template <class T>
using ParamList = std::vector<Parameter<T>*>;

template <class T>
void zero_grads(const ParamList<T>& params) {
  for (auto* p : params) p->zero_grad();
}

template <class T>
std::size_t parameter_count(const ParamList<T>& params) {
  std::size_t n = 0;
  for (const auto* p : params) n += p->size();
  return n;
}

}  // namespace rtnet
