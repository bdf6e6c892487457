#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rtnet/substrate/kernels.hpp"
#include "rtnet/substrate/rng.hpp"
#include "rtnet/substrate/tensor.hpp"

namespace rtnet {

enum class Activation { none, relu, sigmoid };

template <class T>
T sigmoid(T x) {
  // Split form keeps exp() from overflowing for large |x|.
  if (x >= T(0)) {
    const T e = std::exp(-x);
    return T(1) / (T(1) + e);
  }
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <class T>
void init_uniform(Tensor<T>& t, RngStream& rng, double bound) {
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <class T>
T apply_activation(T v, Activation kind) {
  switch (kind) {
    case Activation::relu:
      return v > T(0) ? v : T(0);
    case Activation::sigmoid:
      return sigmoid(v);
    case Activation::none:
      break;
  }
  return v;
}

// Derivative expressed through the activation's output.
template <class T>
T activation_grad_from_output(T y, Activation kind) {
  switch (kind) {
    case Activation::relu:
      return y > T(0) ? T(1) : T(0);
    case Activation::sigmoid:
      return y * (T(1) - y);
    case Activation::none:
      break;
  }
  return T(1);
}

// y = kind(W x + b) with W stored out x in.
template <class T>
std::vector<T> affine_activation(std::span<const T> x, const Tensor<T>& weight,
                                 const Tensor<T>& bias, Activation kind) {
  require(weight.shape().size() == 2, "affine: weight must be a matrix");
  require(weight.cols() == x.size(), "affine: input width does not match weight columns");
  require(bias.size() == weight.rows(), "affine: bias width does not match weight rows");
  std::vector<T> y(bias.values());
  kernels::gemv_acc(weight.data(), weight.rows(), weight.cols(), x.data(), y.data());
  for (auto& v : y) v = apply_activation(v, kind);
  return y;
}

template <class T>
class Affine {
 public:
  Affine() = default;
  Affine(const std::string& name, std::size_t in, std::size_t out, Activation kind)
      : weight(name + ".weight", {out, in}), bias(name + ".bias", {out}), kind_(kind) {}

  std::size_t in() const { return weight.value.cols(); }
  std::size_t out() const { return weight.value.rows(); }
  Activation kind() const { return kind_; }

  void init(RngStream& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in()));
    init_uniform(weight.value, rng, bound);
    init_uniform(bias.value, rng, bound);
  }

  std::vector<T> forward(std::span<const T> x) const {
    return affine_activation(x, weight.value, bias.value, kind_);
  }

  // Accumulates parameter gradients for one (x, y = forward(x)) pair and
  // returns dL/dx.
  std::vector<T> backward(std::span<const T> x, std::span<const T> y, std::span<const T> dy) {
    require(dy.size() == out() && y.size() == out() && x.size() == in(),
            "affine backward: shape mismatch");
    std::vector<T> dz(out());
    for (std::size_t i = 0; i < out(); ++i) dz[i] = dy[i] * activation_grad_from_output(y[i], kind_);
    kernels::ger_acc(weight.grad.data(), out(), in(), dz.data(), x.data());
    kernels::axpy(T(1), dz.data(), bias.grad.data(), out());
    std::vector<T> dx(in(), T(0));
    kernels::gemv_t_acc(weight.value.data(), out(), in(), dz.data(), dx.data());
    return dx;
  }

  void collect(ParamList<T>& out_params) {
    out_params.push_back(&weight);
    out_params.push_back(&bias);
  }

  Parameter<T> weight;
  Parameter<T> bias;

 private:
  Activation kind_ = Activation::none;
};

}  // namespace rtnet
