#pragma once
// RTNet and RTNet-VAE: response encoder, reduction to h_z (ReLU layer or
// variational bottleneck), and the frame-level inference network.

#include <span>
#include <vector>

#include "rtnet/features/dataset.hpp"
#include "rtnet/model/config.hpp"
#include "rtnet/model/encoder.hpp"
#include "rtnet/model/inference.hpp"
#include "rtnet/model/vae.hpp"
#include "rtnet/substrate/loss.hpp"

namespace rtnet::model {

struct PairLoss {
  double bce = 0.0;
  double kl = 0.0;
  double total = 0.0;  // bce + w_kl * kl
  std::size_t frames = 0;
  bool clamped = false;
};

template <class T>
class RtNetModel {
  ModelConfig cfg_;

 public:
  struct Trace {
    typename Encoder<T>::Trace encoder;
    typename Vae<T>::Trace vae;
    std::vector<T> concat;
    std::vector<T> hz;
    std::vector<T> x;
    typename InferenceNet<T>::Trace inference;
  };

  explicit RtNetModel(const ModelConfig& cfg)
      : cfg_(cfg),
        embedding("embedding", cfg.vocab_size, cfg.embedding_dim),
        encoder(cfg, nullptr),
        reduce("reduce", 3 * 2 * cfg.master_hidden, cfg.hz_dim, Activation::relu),
        vae(3 * 2 * cfg.master_hidden, cfg),
        inference(cfg.acoustic_dim + cfg.embedding_dim, cfg),
        silence(cfg.acoustic_dim, 0.0f) {
    cfg.validate();
    require(!(cfg.variant == Variant::rtnet_vae && cfg.encoder_mode == EncoderMode::none),
            "encoder_mode none cannot be combined with the rtnet-vae variant");
    encoder.set_embedding(&embedding);
  }

  RtNetModel(const RtNetModel& other)
      : cfg_(other.cfg_),
        embedding(other.embedding),
        encoder(other.encoder),
        reduce(other.reduce),
        vae(other.vae),
        inference(other.inference),
        silence(other.silence) {
    encoder.set_embedding(&embedding);
  }
  RtNetModel& operator=(const RtNetModel&) = delete;

  const ModelConfig& config() const { return cfg_; }
  bool is_vae() const { return cfg_.variant == Variant::rtnet_vae; }
  bool has_encoder() const { return cfg_.encoder_mode != EncoderMode::none; }
  std::size_t input_width() const { return cfg_.acoustic_dim + cfg_.embedding_dim; }

  void init(std::uint64_t seed) {
    RngStream emb_rng(seed, 1), enc_rng(seed, 2), red_rng(seed, 3), inf_rng(seed, 4);
    embedding.init(emb_rng);
    encoder.init(enc_rng);
    if (is_vae()) {
      vae.init(red_rng);
    } else {
      reduce.init(red_rng);
    }
    inference.init(inf_rng);
  }

  // Trainable parameters in checkpoint order. Blocks the configuration does
  // not use are left out.
  ParamList<T> parameters() {
    ParamList<T> out;
    if (uses_user_linguistic() || (has_encoder() && encoder.uses_linguistic())) {
      embedding.collect(out);
    }
    if (has_encoder()) {
      encoder.collect(out);
      if (is_vae()) {
        vae.collect(out);
      } else {
        reduce.collect(out);
      }
    }
    inference.collect(out);
    return out;
  }

  bool uses_user_acoustic() const { return cfg_.user_features != UserFeatures::linguistic; }
  bool uses_user_linguistic() const { return cfg_.user_features != UserFeatures::acoustic; }

  // Frame features [acoustic ; embedding] for frames [0, n). Frames past the
  // pair's own frames use the silence template.
  std::vector<T> user_input(const features::PairExample& ex, std::size_t n) const {
    require(n <= ex.user_tokens.size(), "user_input: more frames requested than the stream holds");
    require(ex.acoustic_dim == cfg_.acoustic_dim, "user_input: acoustic dimension mismatch");
    const std::size_t da = cfg_.acoustic_dim;
    const std::size_t w = input_width();
    std::vector<T> x(n * w, T(0));
    for (std::size_t t = 0; t < n; ++t) {
      T* row = x.data() + t * w;
      if (uses_user_acoustic()) {
        const float* src = t < ex.frames ? ex.user_acoustic.data() + t * da : silence.data();
        for (std::size_t d = 0; d < da; ++d) row[d] = static_cast<T>(src[d]);
      }
      if (uses_user_linguistic()) {
        const auto e = embedding.lookup(ex.user_tokens[t]);
        std::copy(e.begin(), e.end(), row + da);
      }
    }
    return x;
  }

  ResponseView response_view(const features::PairExample& ex) const {
    return {ex.sys_tokens, ex.sys_token_frames, ex.sys_acoustic, ex.sys_frames};
  }

  // h_z for the pair's own response. `eps` is used by the VAE only; empty
  // means no sampling noise.
  std::vector<T> encode(const features::PairExample& ex, std::span<const T> eps, Trace& tr) const {
    if (!has_encoder()) {
      tr.hz.assign(cfg_.hz_dim, T(0));
      return tr.hz;
    }
    tr.concat = encoder.forward(response_view(ex), tr.encoder);
    tr.hz = is_vae() ? vae.forward(tr.concat, eps, tr.vae) : reduce.forward(tr.concat);
    return tr.hz;
  }

  std::vector<T> encode(const features::PairExample& ex) const {
    Trace tr;
    return encode(ex, {}, tr);
  }

  // Deterministic latent mean for the pair's response (VAE only).
  std::vector<T> latent_mean(const features::PairExample& ex) const {
    require(is_vae(), "latent_mean: model is not a VAE");
    Trace tr;
    encode(ex, {}, tr);
    return tr.vae.mu;
  }

  double kl_of(const features::PairExample& ex) const {
    if (!is_vae()) return 0.0;
    Trace tr;
    encode(ex, {}, tr);
    return vae.kl(tr.vae);
  }

  std::vector<T> decode_latent(std::span<const double> z) const {
    require(is_vae(), "decode_latent: model is not a VAE");
    std::vector<T> zt(z.begin(), z.end());
    return vae.decode(zt);
  }

  // y_n for frames [0, n) given h_z; n may extend into the padded frames.
  std::vector<double> probabilities(const features::PairExample& ex, std::size_t n,
                                    std::span<const T> hz) const {
    const auto x = user_input(ex, n);
    typename InferenceNet<T>::Trace tr;
    const auto y = inference.forward(x, n, hz, tr);
    return {y.begin(), y.end()};
  }

  // BCE over [r_start, r_end] (+ w_kl * KL for the VAE). With `backward`,
  // accumulates `scale` times the gradient of the total into the parameters.
  PairLoss pair_loss(const features::PairExample& ex, int r_start, std::span<const T> eps,
                     double w_kl, bool backward, double scale = 1.0) {
    require(r_start >= ex.r_start_bound && r_start <= ex.r_end,
            "pair_loss: r_start outside the span R");
    Trace tr;
    encode(ex, eps, tr);
    const std::size_t n = static_cast<std::size_t>(ex.r_end) + 1;
    tr.x = user_input(ex, n);
    const auto probs = inference.forward(tr.x, n, tr.hz, tr.inference);

    PairLoss loss;
    loss.frames = static_cast<std::size_t>(ex.r_end - r_start + 1);
    double sum = 0.0;
    for (int t = r_start; t <= ex.r_end; ++t) {
      const T target = t == ex.r_end ? T(1) : T(0);
      const double p = static_cast<double>(probs[static_cast<std::size_t>(t)]);
      if (p < kProbClamp || p > 1.0 - kProbClamp) loss.clamped = true;
      sum += bce_term(probs[static_cast<std::size_t>(t)], target);
    }
    loss.bce = sum / static_cast<double>(loss.frames);
    loss.kl = is_vae() ? vae.kl(tr.vae) : 0.0;
    loss.total = loss.bce + w_kl * loss.kl;
    if (!backward) return loss;

    const T g = static_cast<T>(scale / static_cast<double>(loss.frames));
    std::vector<T> d_logits(n, T(0));
    for (int t = r_start; t <= ex.r_end; ++t) {
      const auto i = static_cast<std::size_t>(t);
      d_logits[i] = g * bce_logit_grad(probs[i], t == ex.r_end ? T(1) : T(0));
    }
    std::vector<T> dx;
    if (uses_user_linguistic()) dx.assign(n * input_width(), T(0));
    const auto d_hz = inference.backward(tr.inference, tr.x, d_logits, dx);
    if (uses_user_linguistic()) {
      const std::size_t da = cfg_.acoustic_dim;
      const std::size_t w = input_width();
      for (std::size_t t = 0; t < n; ++t) {
        embedding.accumulate(ex.user_tokens[t], std::span<const T>(dx.data() + t * w + da, cfg_.embedding_dim));
      }
    }
    if (has_encoder()) {
      std::vector<T> d_concat =
          is_vae() ? vae.backward(tr.vae, d_hz, static_cast<T>(scale * w_kl))
                   : reduce.backward(tr.concat, tr.hz, d_hz);
      encoder.backward(tr.encoder, d_concat);
    }
    return loss;
  }

  Embedding<T> embedding;
  Encoder<T> encoder;
  Affine<T> reduce;
  Vae<T> vae;
  InferenceNet<T> inference;
  std::vector<float> silence;  // acoustic padding template
};

}  // namespace rtnet::model
