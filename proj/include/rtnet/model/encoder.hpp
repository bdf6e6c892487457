#pragma once
// Response encoder: acoustic Bi-LSTM over the response frames, linguistic
// Bi-LSTM over the response tokens, and a master Bi-LSTM over the per-token
// concatenation [acoustic state at the token's start frame ; linguistic
// state]. WAIT and NONE have no start frame and use two trained acoustic
// vectors instead. The encoder returns [h_0 ; h_1 ; h_I], the master outputs
// at the first two and the last token; the reduction to h_z is owned by the
// model (plain ReLU layer or variational bottleneck).

#include <span>
#include <string>
#include <vector>

#include "rtnet/features/vocab.hpp"
#include "rtnet/model/config.hpp"
#include "rtnet/substrate/embedding.hpp"
#include "rtnet/substrate/lstm.hpp"

namespace rtnet::model {

struct ResponseView {
  std::span<const int> tokens;
  std::span<const int> start_frames;
  std::span<const float> acoustic;  // frames x acoustic_dim
  std::size_t frames = 0;
};

template <class T>
class Encoder {
 public:
  struct Trace {
    std::vector<int> tokens;
    std::vector<int> start_frames;
    std::vector<T> acoustic_in;
    std::vector<T> linguistic_in;
    std::vector<T> master_in;
    typename BiLstm<T>::Trace acoustic;
    typename BiLstm<T>::Trace linguistic;
    typename BiLstm<T>::Trace master;
  };

  Encoder() = default;
  Encoder(const ModelConfig& cfg, Embedding<T>* embedding)
      : acoustic("encoder.acoustic", cfg.acoustic_dim, cfg.acoustic_hidden),
        linguistic("encoder.linguistic", cfg.embedding_dim, cfg.linguistic_hidden),
        master("encoder.master", 2 * cfg.acoustic_hidden + 2 * cfg.linguistic_hidden,
               cfg.master_hidden),
        wait_acoustic("encoder.wait_acoustic", {2 * cfg.acoustic_hidden}),
        none_acoustic("encoder.none_acoustic", {2 * cfg.acoustic_hidden}),
        mode_(cfg.encoder_mode),
        embedding_(embedding) {}

  std::size_t output_width() const { return 3 * master.output_width(); }
  EncoderMode mode() const { return mode_; }
  void set_embedding(Embedding<T>* e) { embedding_ = e; }

  void init(RngStream& rng) {
    acoustic.init(rng);
    linguistic.init(rng);
    master.init(rng);
    init_uniform(wait_acoustic.value, rng, 0.1);
    init_uniform(none_acoustic.value, rng, 0.1);
  }

  // Parameters this encoder owns (the shared embedding is collected by the
  // model).
  void collect(ParamList<T>& out) {
    acoustic.collect(out);
    out.push_back(&wait_acoustic);
    out.push_back(&none_acoustic);
    linguistic.collect(out);
    master.collect(out);
  }

  bool uses_acoustic() const { return mode_ == EncoderMode::full || mode_ == EncoderMode::acoustic_only; }
  bool uses_linguistic() const {
    return mode_ == EncoderMode::full || mode_ == EncoderMode::linguistic_only;
  }

  std::vector<T> forward(const ResponseView& r, Trace& tr) const {
    require(mode_ != EncoderMode::none, "encoder: forward called in mode none");
    validate(r);
    const std::size_t n = r.tokens.size();
    const std::size_t wa = acoustic.output_width();
    const std::size_t wl = linguistic.output_width();
    const std::size_t wm = wa + wl;
    tr.tokens.assign(r.tokens.begin(), r.tokens.end());
    tr.start_frames.assign(r.start_frames.begin(), r.start_frames.end());
    tr.master_in.assign(n * wm, T(0));
    if (uses_acoustic()) {
      tr.acoustic_in.assign(r.acoustic.size(), T(0));
      for (std::size_t i = 0; i < r.acoustic.size(); ++i) tr.acoustic_in[i] = static_cast<T>(r.acoustic[i]);
      acoustic.forward(tr.acoustic_in, r.frames, tr.acoustic);
      for (std::size_t j = 0; j < n; ++j) {
        const T* src = acoustic_source(tr, j);
        std::copy_n(src, wa, tr.master_in.data() + j * wm);
      }
    }
    if (uses_linguistic()) {
      const std::size_t e = embedding_->dim();
      tr.linguistic_in.assign(n * e, T(0));
      for (std::size_t j = 0; j < n; ++j) {
        const auto row = embedding_->lookup(r.tokens[j]);
        std::copy(row.begin(), row.end(), tr.linguistic_in.data() + j * e);
      }
      linguistic.forward(tr.linguistic_in, n, tr.linguistic);
      for (std::size_t j = 0; j < n; ++j) {
        std::copy_n(tr.linguistic.output.data() + j * wl, wl, tr.master_in.data() + j * wm + wa);
      }
    }
    master.forward(tr.master_in, n, tr.master);
    const std::size_t wo = master.output_width();
    std::vector<T> out(3 * wo);
    const std::size_t picks[3] = {0, 1, n - 1};
    for (std::size_t k = 0; k < 3; ++k) {
      std::copy_n(tr.master.output.data() + picks[k] * wo, wo, out.data() + k * wo);
    }
    return out;
  }

  // Accumulates gradients for one forward pass given dL/d[h_0; h_1; h_I].
  void backward(const Trace& tr, std::span<const T> d_out) {
    const std::size_t n = tr.tokens.size();
    const std::size_t wo = master.output_width();
    require(d_out.size() == 3 * wo, "encoder backward: gradient width mismatch");
    const std::size_t wa = acoustic.output_width();
    const std::size_t wl = linguistic.output_width();
    const std::size_t wm = wa + wl;
    std::vector<T> d_master(n * wo, T(0));
    const std::size_t picks[3] = {0, 1, n - 1};
    for (std::size_t k = 0; k < 3; ++k) {
      kernels::axpy(T(1), d_out.data() + k * wo, d_master.data() + picks[k] * wo, wo);
    }
    std::vector<T> d_master_in(n * wm, T(0));
    master.backward(tr.master, tr.master_in, d_master, d_master_in);

    if (uses_linguistic()) {
      std::vector<T> d_ling(n * wl);
      for (std::size_t j = 0; j < n; ++j) {
        std::copy_n(d_master_in.data() + j * wm + wa, wl, d_ling.data() + j * wl);
      }
      const std::size_t e = embedding_->dim();
      std::vector<T> d_emb(n * e, T(0));
      linguistic.backward(tr.linguistic, tr.linguistic_in, d_ling, d_emb);
      for (std::size_t j = 0; j < n; ++j) {
        embedding_->accumulate(tr.tokens[j], std::span<const T>(d_emb.data() + j * e, e));
      }
    }
    if (uses_acoustic()) {
      const std::size_t frames = tr.acoustic.fwd.steps;
      std::vector<T> d_ac(frames * wa, T(0));
      for (std::size_t j = 0; j < n; ++j) {
        const T* g = d_master_in.data() + j * wm;
        if (tr.tokens[j] == features::kWait) {
          kernels::axpy(T(1), g, wait_acoustic.grad.data(), wa);
        } else if (tr.tokens[j] == features::kNone) {
          kernels::axpy(T(1), g, none_acoustic.grad.data(), wa);
        } else {
          kernels::axpy(T(1), g, d_ac.data() + static_cast<std::size_t>(tr.start_frames[j]) * wa, wa);
        }
      }
      acoustic.backward(tr.acoustic, tr.acoustic_in, d_ac, {});
    }
  }

  BiLstm<T> acoustic;
  BiLstm<T> linguistic;
  BiLstm<T> master;
  Parameter<T> wait_acoustic;
  Parameter<T> none_acoustic;

 private:
  const T* acoustic_source(const Trace& tr, std::size_t j) const {
    if (tr.tokens[j] == features::kWait) return wait_acoustic.value.data();
    if (tr.tokens[j] == features::kNone) return none_acoustic.value.data();
    return tr.acoustic.output.data() +
           static_cast<std::size_t>(tr.start_frames[j]) * acoustic.output_width();
  }

  void validate(const ResponseView& r) const {
    const std::size_t n = r.tokens.size();
    require(n >= 3, "encoder: response needs WAIT, at least one token, and NONE");
    require(r.start_frames.size() == n, "encoder: one start frame per token required");
    require(r.tokens.front() == features::kWait && r.tokens.back() == features::kNone,
            "encoder: token sequence must start with WAIT and end with NONE");
    require(r.frames > 0, "encoder: response has no acoustic frames");
    require(r.acoustic.size() == r.frames * acoustic.input(),
            "encoder: acoustic frames do not match frames x acoustic_dim");
    for (std::size_t j = 1; j + 1 < n; ++j) {
      require(r.start_frames[j] >= 0 && static_cast<std::size_t>(r.start_frames[j]) < r.frames,
              "encoder: token start frame outside the response frames");
      require(r.tokens[j] != features::kWait && r.tokens[j] != features::kNone,
              "encoder: WAIT/NONE inside the response");
    }
  }

  EncoderMode mode_ = EncoderMode::full;
  Embedding<T>* embedding_ = nullptr;
};

}  // namespace rtnet::model
