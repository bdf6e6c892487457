#pragma once
// Inference network: a single-layer LSTM over the user's frame features with
// h_z concatenated at every step, followed by a sigmoid head.
//
//   [h_n; c_n] = LSTM([x_n; h_z], [h_{n-1}; c_{n-1}])
//   y_n        = sigmoid(W_h h_n + b_h)
//
// The input weight is stored as two blocks, W_x for x_n and W_z for h_z;
// since h_z is constant over the sequence its contribution W_z h_z is added
// once per sequence as a gate offset.

#include <span>
#include <vector>

#include "rtnet/model/config.hpp"
#include "rtnet/substrate/lstm.hpp"

namespace rtnet::model {

template <class T>
class InferenceNet {
 public:
  struct Trace {
    std::size_t steps = 0;
    std::vector<T> hz;
    std::vector<T> gate_offset;
    typename Lstm<T>::Trace lstm;
    std::vector<T> logits;
    std::vector<T> probs;
  };

  InferenceNet() = default;
  InferenceNet(std::size_t input, const ModelConfig& cfg)
      : cell("inference.lstm", input, cfg.inference_hidden),
        w_z("inference.w_z", {4 * cfg.inference_hidden, cfg.hz_dim}),
        head("inference.head", cfg.inference_hidden, 1, Activation::none) {}

  std::size_t input() const { return cell.input(); }
  std::size_t hz_dim() const { return w_z.value.cols(); }

  void init(RngStream& rng) {
    cell.init(rng);
    init_uniform(w_z.value, rng, 1.0 / std::sqrt(static_cast<double>(cell.hidden())));
    head.init(rng);
  }

  void collect(ParamList<T>& out) {
    cell.collect(out);
    out.push_back(&w_z);
    head.collect(out);
  }

  // x is steps x input. Returns y_n for every frame.
  std::vector<T> forward(std::span<const T> x, std::size_t steps, std::span<const T> hz,
                         Trace& tr) const {
    require(hz.size() == hz_dim(), "inference: h_z width mismatch");
    require(steps > 0, "inference: empty frame sequence");
    const std::size_t H = cell.hidden();
    tr.steps = steps;
    tr.hz.assign(hz.begin(), hz.end());
    tr.gate_offset.assign(4 * H, T(0));
    kernels::gemv_acc(w_z.value.data(), 4 * H, hz_dim(), hz.data(), tr.gate_offset.data());
    cell.forward(x, steps, false, tr.gate_offset, tr.lstm);
    tr.logits.resize(steps);
    tr.probs.resize(steps);
    const T* w = head.weight.value.data();
    const T b = head.bias.value[0];
    for (std::size_t t = 0; t < steps; ++t) {
      tr.logits[t] = b + kernels::dot(w, tr.lstm.hidden.data() + t * H, H);
      tr.probs[t] = sigmoid(tr.logits[t]);
    }
    return tr.probs;
  }

  // d_logits has one entry per frame. Accumulates parameter gradients, adds
  // dL/dx into `dx` when non-empty, and returns dL/dh_z.
  std::vector<T> backward(const Trace& tr, std::span<const T> x, std::span<const T> d_logits,
                          std::span<T> dx) {
    const std::size_t H = cell.hidden();
    require(d_logits.size() == tr.steps, "inference backward: one gradient per frame required");
    std::vector<T> dh(tr.steps * H, T(0));
    const T* w = head.weight.value.data();
    for (std::size_t t = 0; t < tr.steps; ++t) {
      const T g = d_logits[t];
      if (g == T(0)) continue;
      kernels::axpy(g, tr.lstm.hidden.data() + t * H, head.weight.grad.data(), H);
      head.bias.grad[0] += g;
      kernels::axpy(g, w, dh.data() + t * H, H);
    }
    std::vector<T> d_offset(4 * H, T(0));
    cell.backward(tr.lstm, x, dh, dx, d_offset);
    kernels::ger_acc(w_z.grad.data(), 4 * H, hz_dim(), d_offset.data(), tr.hz.data());
    std::vector<T> d_hz(hz_dim(), T(0));
    kernels::gemv_t_acc(w_z.value.data(), 4 * H, hz_dim(), d_offset.data(), d_hz.data());
    return d_hz;
  }

  Lstm<T> cell;
  Parameter<T> w_z;
  Affine<T> head;
};

}  // namespace rtnet::model
