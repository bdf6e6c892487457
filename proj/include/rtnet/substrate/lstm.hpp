#pragma once
// LSTM and bidirectional LSTM with full backpropagation through time.
//
// Cell (no peepholes), gate order i, f, g, o:
//   i = sigmoid(.), f = sigmoid(.), g = tanh(.), o = sigmoid(.)
//   c = f * c_prev + i * g
//   h = o * tanh(c)
// Pre-activations are W_ih x + W_hh h_prev + bias (+ an optional per-sequence
// constant offset, used to feed a vector that is identical at every step).

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rtnet/substrate/affine.hpp"
#include "rtnet/substrate/kernels.hpp"
#include "rtnet/substrate/tensor.hpp"

namespace rtnet {

template <class T>
class Lstm {
 public:
  struct Trace {
    std::size_t steps = 0;
    bool reverse = false;
    std::vector<T> gates;   // steps x 4H, post-activation
    std::vector<T> cells;   // steps x H
    std::vector<T> hidden;  // steps x H
    std::vector<T> tanh_c;  // steps x H
  };

  Lstm() = default;
  Lstm(const std::string& name, std::size_t input, std::size_t hidden)
      : w_ih(name + ".w_ih", {4 * hidden, input}),
        w_hh(name + ".w_hh", {4 * hidden, hidden}),
        bias(name + ".bias", {4 * hidden}),
        input_(input),
        hidden_(hidden) {}

  std::size_t input() const { return input_; }
  std::size_t hidden() const { return hidden_; }

  void init(RngStream& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_));
    init_uniform(w_ih.value, rng, bound);
    init_uniform(w_hh.value, rng, bound);
    init_uniform(bias.value, rng, bound);
  }

  void collect(ParamList<T>& out) {
    out.push_back(&w_ih);
    out.push_back(&w_hh);
    out.push_back(&bias);
  }

  // One cell update; `pre` is scratch of size 4H.
  void step(const T* x, const T* h_prev, const T* c_prev, const T* gate_offset, T* gates,
            T* c, T* h, T* tanh_c) const {
    const std::size_t H = hidden_;
    std::copy(bias.value.data(), bias.value.data() + 4 * H, gates);
    if (gate_offset != nullptr) kernels::axpy(T(1), gate_offset, gates, 4 * H);
    kernels::gemv_acc(w_ih.value.data(), 4 * H, input_, x, gates);
    if (h_prev != nullptr) kernels::gemv_acc(w_hh.value.data(), 4 * H, H, h_prev, gates);
    for (std::size_t k = 0; k < H; ++k) {
      const T ig = sigmoid(gates[k]);
      const T fg = sigmoid(gates[H + k]);
      const T gg = std::tanh(gates[2 * H + k]);
      const T og = sigmoid(gates[3 * H + k]);
      gates[k] = ig;
      gates[H + k] = fg;
      gates[2 * H + k] = gg;
      gates[3 * H + k] = og;
      const T cp = c_prev != nullptr ? c_prev[k] : T(0);
      c[k] = fg * cp + ig * gg;
      tanh_c[k] = std::tanh(c[k]);
      h[k] = og * tanh_c[k];
    }
  }

  // x is steps x input (row-major). Outputs are indexed by position, so a
  // reverse run stores the state produced at position t in row t.
  void forward(std::span<const T> x, std::size_t steps, bool reverse,
               std::span<const T> gate_offset, Trace& tr) const {
    require(steps > 0, "lstm: empty sequence");
    require(x.size() == steps * input_, "lstm: input does not match steps x input width");
    require(gate_offset.empty() || gate_offset.size() == 4 * hidden_,
            "lstm: gate offset must have 4*hidden entries");
    const std::size_t H = hidden_;
    tr.steps = steps;
    tr.reverse = reverse;
    tr.gates.assign(steps * 4 * H, T(0));
    tr.cells.assign(steps * H, T(0));
    tr.hidden.assign(steps * H, T(0));
    tr.tanh_c.assign(steps * H, T(0));
    const T* offset = gate_offset.empty() ? nullptr : gate_offset.data();
    for (std::size_t n = 0; n < steps; ++n) {
      const std::size_t t = reverse ? steps - 1 - n : n;
      const T* h_prev = nullptr;
      const T* c_prev = nullptr;
      if (n > 0) {
        const std::size_t p = reverse ? t + 1 : t - 1;
        h_prev = tr.hidden.data() + p * H;
        c_prev = tr.cells.data() + p * H;
      }
      step(x.data() + t * input_, h_prev, c_prev, offset, tr.gates.data() + t * 4 * H,
           tr.cells.data() + t * H, tr.hidden.data() + t * H, tr.tanh_c.data() + t * H);
    }
  }

  // dh holds dL/dh_t for every position. dx (steps x input) and
  // d_gate_offset (4H) are accumulated into when non-empty.
  void backward(const Trace& tr, std::span<const T> x, std::span<const T> dh, std::span<T> dx,
                std::span<T> d_gate_offset) {
    const std::size_t H = hidden_;
    const std::size_t steps = tr.steps;
    require(dh.size() == steps * H, "lstm backward: dh shape mismatch");
    require(dx.empty() || dx.size() == steps * input_, "lstm backward: dx shape mismatch");
    std::vector<T> dh_next(H, T(0));
    std::vector<T> dc_next(H, T(0));
    std::vector<T> dpre(4 * H);
    for (std::size_t n = steps; n-- > 0;) {
      const std::size_t t = tr.reverse ? steps - 1 - n : n;
      const bool has_prev = n > 0;
      const std::size_t p = tr.reverse ? t + 1 : t - 1;
      const T* g = tr.gates.data() + t * 4 * H;
      const T* tc = tr.tanh_c.data() + t * H;
      const T* c_prev = has_prev ? tr.cells.data() + p * H : nullptr;
      for (std::size_t k = 0; k < H; ++k) {
        const T ig = g[k], fg = g[H + k], gg = g[2 * H + k], og = g[3 * H + k];
        const T dht = dh[t * H + k] + dh_next[k];
        const T dct = dc_next[k] + dht * og * (T(1) - tc[k] * tc[k]);
        const T cp = c_prev != nullptr ? c_prev[k] : T(0);
        dpre[k] = dct * gg * ig * (T(1) - ig);
        dpre[H + k] = dct * cp * fg * (T(1) - fg);
        dpre[2 * H + k] = dct * ig * (T(1) - gg * gg);
        dpre[3 * H + k] = dht * tc[k] * og * (T(1) - og);
        dc_next[k] = dct * fg;
      }
      kernels::ger_acc(w_ih.grad.data(), 4 * H, input_, dpre.data(), x.data() + t * input_);
      kernels::axpy(T(1), dpre.data(), bias.grad.data(), 4 * H);
      if (!d_gate_offset.empty()) kernels::axpy(T(1), dpre.data(), d_gate_offset.data(), 4 * H);
      if (!dx.empty()) {
        kernels::gemv_t_acc(w_ih.value.data(), 4 * H, input_, dpre.data(), dx.data() + t * input_);
      }
      std::fill(dh_next.begin(), dh_next.end(), T(0));
      if (has_prev) {
        kernels::ger_acc(w_hh.grad.data(), 4 * H, H, dpre.data(), tr.hidden.data() + p * H);
        kernels::gemv_t_acc(w_hh.value.data(), 4 * H, H, dpre.data(), dh_next.data());
      }
    }
  }

  Parameter<T> w_ih;
  Parameter<T> w_hh;
  Parameter<T> bias;

 private:
  std::size_t input_ = 0;
  std::size_t hidden_ = 0;
};

// Single LSTM update from an explicit previous state.
template <class T>
std::pair<std::vector<T>, std::vector<T>> lstm_step(std::span<const T> x, std::span<const T> h_prev,
                                                    std::span<const T> c_prev, const Lstm<T>& cell) {
  const std::size_t H = cell.hidden();
  require(x.size() == cell.input(), "lstm_step: input width mismatch");
  require(h_prev.size() == H && c_prev.size() == H, "lstm_step: state width mismatch");
  std::vector<T> gates(4 * H), c(H), h(H), tc(H);
  cell.step(x.data(), h_prev.data(), c_prev.data(), nullptr, gates.data(), c.data(), h.data(),
            tc.data());
  return {std::move(h), std::move(c)};
}

// Output t is [forward hidden at t ; backward hidden at t].
template <class T>
class BiLstm {
 public:
  struct Trace {
    typename Lstm<T>::Trace fwd;
    typename Lstm<T>::Trace bwd;
    std::vector<T> output;  // steps x 2H
  };

  BiLstm() = default;
  BiLstm(const std::string& name, std::size_t input, std::size_t hidden)
      : fwd(name + ".fwd", input, hidden), bwd(name + ".bwd", input, hidden) {}

  std::size_t input() const { return fwd.input(); }
  std::size_t hidden() const { return fwd.hidden(); }
  std::size_t output_width() const { return 2 * fwd.hidden(); }

  void init(RngStream& rng) {
    fwd.init(rng);
    bwd.init(rng);
  }

  void collect(ParamList<T>& out) {
    fwd.collect(out);
    bwd.collect(out);
  }

  void forward(std::span<const T> x, std::size_t steps, Trace& tr) const {
    fwd.forward(x, steps, false, {}, tr.fwd);
    bwd.forward(x, steps, true, {}, tr.bwd);
    const std::size_t H = hidden();
    tr.output.assign(steps * 2 * H, T(0));
    for (std::size_t t = 0; t < steps; ++t) {
      std::copy_n(tr.fwd.hidden.data() + t * H, H, tr.output.data() + t * 2 * H);
      std::copy_n(tr.bwd.hidden.data() + t * H, H, tr.output.data() + t * 2 * H + H);
    }
  }

  void backward(const Trace& tr, std::span<const T> x, std::span<const T> d_out, std::span<T> dx) {
    const std::size_t H = hidden();
    const std::size_t steps = tr.fwd.steps;
    require(d_out.size() == steps * 2 * H, "bilstm backward: gradient shape mismatch");
    std::vector<T> dh_f(steps * H), dh_b(steps * H);
    for (std::size_t t = 0; t < steps; ++t) {
      std::copy_n(d_out.data() + t * 2 * H, H, dh_f.data() + t * H);
      std::copy_n(d_out.data() + t * 2 * H + H, H, dh_b.data() + t * H);
    }
    fwd.backward(tr.fwd, x, dh_f, dx, {});
    bwd.backward(tr.bwd, x, dh_b, dx, {});
  }

  Lstm<T> fwd;
  Lstm<T> bwd;
};

// Convenience wrapper: runs the bidirectional layer and returns its outputs
// as one vector per position.
template <class T>
std::vector<std::vector<T>> bilstm_sequence(const std::vector<std::vector<T>>& seq,
                                            const BiLstm<T>& layer) {
  require(!seq.empty(), "bilstm_sequence: empty sequence");
  std::vector<T> flat;
  flat.reserve(seq.size() * layer.input());
  for (const auto& v : seq) {
    require(v.size() == layer.input(), "bilstm_sequence: input width mismatch");
    flat.insert(flat.end(), v.begin(), v.end());
  }
  typename BiLstm<T>::Trace tr;
  layer.forward(flat, seq.size(), tr);
  std::vector<std::vector<T>> out(seq.size());
  const std::size_t W = layer.output_width();
  for (std::size_t t = 0; t < seq.size(); ++t) {
    out[t].assign(tr.output.begin() + t * W, tr.output.begin() + (t + 1) * W);
  }
  return out;
}

}  // namespace rtnet
