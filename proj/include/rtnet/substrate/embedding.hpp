#pragma once

#include <span>
#include <string>

#include "rtnet/substrate/affine.hpp"
#include "rtnet/substrate/tensor.hpp"

namespace rtnet {

template <class T>
class Embedding {
 public:
  Embedding() = default;
  Embedding(const std::string& name, std::size_t count, std::size_t dim)
      : table(name + ".table", {count, dim}) {}

  std::size_t count() const { return table.value.rows(); }
  std::size_t dim() const { return table.value.cols(); }

  // Uniform in [-0.05, 0.05].
  void init(RngStream& rng) { init_uniform(table.value, rng, 0.05); }

  std::span<const T> lookup(int id) const {
    require(id >= 0 && static_cast<std::size_t>(id) < count(), "embedding: id out of range");
    return table.value.row(static_cast<std::size_t>(id));
  }

  void accumulate(int id, std::span<const T> grad) {
    require(id >= 0 && static_cast<std::size_t>(id) < count(), "embedding: id out of range");
    kernels::axpy(T(1), grad.data(), table.grad.row(static_cast<std::size_t>(id)).data(), dim());
  }

  void collect(ParamList<T>& out) { out.push_back(&table); }

  Parameter<T> table;
};

}  // namespace rtnet
