#pragma once
// Variational bottleneck between the encoder and the inference network:
//
//   h_reduce  = relu(W_r [h_0; h_1; h_I] + b_r)
//   mu        = act_mu(W_mu h_reduce + b_mu)
//   sigma_hat = act_s(W_s h_reduce + b_s)
//   sigma     = exp(sigma_hat / 2)
//   z         = mu + sigma * eps,  eps ~ N(0, I)  (eps = 0 when not sampling)
//   h_z       = relu(W_e z + b_e)
//
//   L_KL = -1/(2 N_z) * sum(1 + sigma_hat - mu^2 - exp(sigma_hat))
//
// ModelConfig::vae_heads picks the head activations. The default is a linear
// mu with relu sigma_hat, so sigma >= 1 while training. A relu mu head tends
// to die at initialization and leaves the latent constant across responses.

#include <cmath>
#include <span>
#include <vector>

#include "rtnet/model/config.hpp"
#include "rtnet/substrate/affine.hpp"

namespace rtnet::model {

template <class T>
double kl_loss(std::span<const T> mu, std::span<const T> sigma_hat) {
  require(mu.size() == sigma_hat.size() && !mu.empty(), "kl_loss: mu and sigma_hat widths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double m = static_cast<double>(mu[i]);
    const double s = static_cast<double>(sigma_hat[i]);
    sum += 1.0 + s - m * m - std::exp(s);
  }
  return -sum / (2.0 * static_cast<double>(mu.size()));
}

template <class T>
class Vae {
 public:
  struct Trace {
    std::vector<T> input;
    std::vector<T> reduce;
    std::vector<T> mu;
    std::vector<T> sigma_hat;
    std::vector<T> sigma;
    std::vector<T> eps;
    std::vector<T> z;
    std::vector<T> hz;
  };

  Vae() = default;
  Vae(std::size_t input, const ModelConfig& cfg)
      : reduce("vae.reduce", input, cfg.vae_reduce, Activation::relu),
        mu_head("vae.mu", cfg.vae_reduce, cfg.latent_dim,
                cfg.vae_heads == VaeHeads::relu ? Activation::relu : Activation::none),
        sigma_head("vae.sigma_hat", cfg.vae_reduce, cfg.latent_dim,
                   cfg.vae_heads == VaeHeads::linear ? Activation::none : Activation::relu),
        expand("vae.expand", cfg.latent_dim, cfg.hz_dim, Activation::relu) {}

  std::size_t latent_dim() const { return mu_head.out(); }
  std::size_t input_width() const { return reduce.in(); }

  void init(RngStream& rng) {
    reduce.init(rng);
    mu_head.init(rng);
    sigma_head.init(rng);
    expand.init(rng);
  }

  void collect(ParamList<T>& out) {
    reduce.collect(out);
    mu_head.collect(out);
    sigma_head.collect(out);
    expand.collect(out);
  }

  // `eps` empty means no sampling (z = mu).
  std::vector<T> forward(std::span<const T> input, std::span<const T> eps, Trace& tr) const {
    require(input.size() == reduce.in(), "vae: input width does not match the reduction layer");
    require(eps.empty() || eps.size() == latent_dim(), "vae: eps width must equal N_z");
    tr.input.assign(input.begin(), input.end());
    tr.reduce = reduce.forward(input);
    tr.mu = mu_head.forward(tr.reduce);
    tr.sigma_hat = sigma_head.forward(tr.reduce);
    const std::size_t nz = latent_dim();
    tr.sigma.resize(nz);
    tr.eps.assign(nz, T(0));
    tr.z.resize(nz);
    for (std::size_t i = 0; i < nz; ++i) {
      tr.sigma[i] = std::exp(tr.sigma_hat[i] / T(2));
      if (!eps.empty()) tr.eps[i] = eps[i];
      tr.z[i] = tr.mu[i] + tr.sigma[i] * tr.eps[i];
    }
    tr.hz = expand.forward(tr.z);
    return tr.hz;
  }

  // h_z for a latent vector chosen directly (e.g. from a LatentSpec).
  std::vector<T> decode(std::span<const T> z) const {
    require(z.size() == latent_dim(), "vae: latent width mismatch");
    return expand.forward(z);
  }

  double kl(const Trace& tr) const { return kl_loss<T>(tr.mu, tr.sigma_hat); }

  // Accumulates gradients of (L_downstream + kl_weight * L_KL) given dL/dh_z
  // and returns dL/dinput.
  std::vector<T> backward(const Trace& tr, std::span<const T> d_hz, T kl_weight) {
    const std::size_t nz = latent_dim();
    const auto dz = expand.backward(tr.z, tr.hz, d_hz);
    const T inv = T(1) / static_cast<T>(nz);
    std::vector<T> d_mu(nz), d_sh(nz);
    for (std::size_t i = 0; i < nz; ++i) {
      d_mu[i] = dz[i] + kl_weight * tr.mu[i] * inv;
      d_sh[i] = dz[i] * tr.eps[i] * tr.sigma[i] / T(2) +
                kl_weight * (std::exp(tr.sigma_hat[i]) - T(1)) * inv / T(2);
    }
    auto d_reduce = mu_head.backward(tr.reduce, tr.mu, d_mu);
    const auto d_reduce_s = sigma_head.backward(tr.reduce, tr.sigma_hat, d_sh);
    for (std::size_t i = 0; i < d_reduce.size(); ++i) d_reduce[i] += d_reduce_s[i];
    return reduce.backward(tr.input, tr.reduce, d_reduce);
  }

  Affine<T> reduce;
  Affine<T> mu_head;
  Affine<T> sigma_head;
  Affine<T> expand;
};

}  // namespace rtnet::model
