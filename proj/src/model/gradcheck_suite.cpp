#include "rtnet/model/gradcheck_suite.hpp"

#include "rtnet/model/rtnet.hpp"
#include "rtnet/substrate/embedding.hpp"
#include "rtnet/substrate/lstm.hpp"

namespace rtnet::model {

namespace {

using P = Parameter<double>;

P random_param(const std::string& name, std::vector<std::size_t> shape, RngStream& rng,
               double bound = 1.0) {
  P p(name, std::move(shape));
  init_uniform(p.value, rng, bound);
  return p;
}

std::vector<double> random_vec(std::size_t n, RngStream& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

double weighted_sum(std::span<const double> w, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
  return s;
}

BlockCheck check_affine(Activation kind, const std::string& label, RngStream& rng,
                        const GradCheckOptions& opt) {
  Affine<double> layer("affine", 5, 4, kind);
  layer.init(rng);
  P x = random_param("affine.input", {5}, rng);
  const auto w = random_vec(4, rng);
  auto loss_only = [&] { return weighted_sum(w, layer.forward(x.value.span())); };
  auto loss_grad = [&] {
    layer.weight.zero_grad();
    layer.bias.zero_grad();
    const auto y = layer.forward(x.value.span());
    const auto dx = layer.backward(x.value.span(), y, w);
    x.grad.values() = dx;
    return weighted_sum(w, y);
  };
  return {label, gradient_check({&layer.weight, &layer.bias, &x}, loss_grad, loss_only, opt)};
}

BlockCheck check_embedding(RngStream& rng, const GradCheckOptions& opt) {
  Embedding<double> emb("embedding", 6, 3);
  init_uniform(emb.table.value, rng, 1.0);
  const std::vector<int> ids{0, 3, 3, 5, 1};
  const auto w = random_vec(ids.size() * 3, rng);
  auto loss_only = [&] {
    double s = 0.0;
    for (std::size_t j = 0; j < ids.size(); ++j) {
      s += weighted_sum(std::span<const double>(w.data() + j * 3, 3), emb.lookup(ids[j]));
    }
    return s;
  };
  auto loss_grad = [&] {
    emb.table.zero_grad();
    for (std::size_t j = 0; j < ids.size(); ++j) {
      emb.accumulate(ids[j], std::span<const double>(w.data() + j * 3, 3));
    }
    return loss_only();
  };
  return {"embedding", gradient_check({&emb.table}, loss_grad, loss_only, opt)};
}

BlockCheck check_lstm(std::size_t steps, bool reverse, bool with_offset, const std::string& label,
                      RngStream& rng, const GradCheckOptions& opt) {
  Lstm<double> cell("lstm", 3, 4);
  cell.init(rng);
  P x = random_param("lstm.input", {steps, 3}, rng);
  P offset = random_param("lstm.gate_offset", {16}, rng, 0.5);
  const auto w = random_vec(steps * 4, rng);
  auto run = [&](Lstm<double>::Trace& tr) {
    cell.forward(x.value.span(), steps, reverse,
                 with_offset ? offset.value.span() : std::span<const double>{}, tr);
  };
  auto loss_only = [&] {
    Lstm<double>::Trace tr;
    run(tr);
    return weighted_sum(w, tr.hidden);
  };
  auto loss_grad = [&] {
    Lstm<double>::Trace tr;
    run(tr);
    cell.w_ih.zero_grad();
    cell.w_hh.zero_grad();
    cell.bias.zero_grad();
    x.zero_grad();
    offset.zero_grad();
    cell.backward(tr, x.value.span(), w, x.grad.span(),
                  with_offset ? offset.grad.span() : std::span<double>{});
    return weighted_sum(w, tr.hidden);
  };
  ParamList<double> params{&cell.w_ih, &cell.w_hh, &cell.bias, &x};
  if (with_offset) params.push_back(&offset);
  return {label, gradient_check(params, loss_grad, loss_only, opt)};
}

BlockCheck check_bilstm(RngStream& rng, const GradCheckOptions& opt) {
  BiLstm<double> layer("bilstm", 3, 4);
  layer.init(rng);
  const std::size_t steps = 4;
  P x = random_param("bilstm.input", {steps, 3}, rng);
  const auto w = random_vec(steps * 8, rng);
  auto loss_only = [&] {
    BiLstm<double>::Trace tr;
    layer.forward(x.value.span(), steps, tr);
    return weighted_sum(w, tr.output);
  };
  auto loss_grad = [&] {
    BiLstm<double>::Trace tr;
    layer.forward(x.value.span(), steps, tr);
    ParamList<double> ps;
    layer.collect(ps);
    zero_grads(ps);
    x.zero_grad();
    layer.backward(tr, x.value.span(), w, x.grad.span());
    return weighted_sum(w, tr.output);
  };
  ParamList<double> params;
  layer.collect(params);
  params.push_back(&x);
  return {"bilstm", gradient_check(params, loss_grad, loss_only, opt)};
}

ModelConfig small_config(Variant variant, EncoderMode mode) {
  ModelConfig c;
  c.variant = variant;
  c.encoder_mode = mode;
  c.acoustic_dim = 3;
  c.vocab_size = 9;
  c.embedding_dim = 3;
  c.acoustic_hidden = 3;
  c.linguistic_hidden = 2;
  c.master_hidden = 3;
  c.hz_dim = 4;
  c.vae_reduce = 4;
  c.latent_dim = 2;
  c.inference_hidden = 4;
  return c;
}

features::PairExample small_example(RngStream& rng) {
  features::PairExample ex;
  ex.id = "gradcheck";
  ex.acoustic_dim = 3;
  ex.frames = 8;
  ex.pad_frames = 0;
  ex.r_start_bound = 3;
  ex.r_end = 7;
  ex.user_last_speech = 5;
  ex.user_acoustic.resize(ex.frames * 3);
  for (auto& v : ex.user_acoustic) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  ex.user_tokens = {0, 0, 3, 3, 5, 3, 7, 7};
  ex.sys_tokens = {features::kWait, 6, features::kSil, 8, features::kNone};
  ex.sys_token_frames = {-1, 0, 2, 3, -1};
  ex.sys_frames = 5;
  ex.sys_acoustic.resize(ex.sys_frames * 3);
  for (auto& v : ex.sys_acoustic) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return ex;
}

BlockCheck check_encoder(EncoderMode mode, const std::string& label, RngStream& rng,
                         const GradCheckOptions& opt) {
  const auto cfg = small_config(Variant::rtnet, mode);
  Embedding<double> emb("embedding", cfg.vocab_size, cfg.embedding_dim);
  init_uniform(emb.table.value, rng, 1.0);
  Encoder<double> enc(cfg, &emb);
  enc.init(rng);
  const auto ex = small_example(rng);
  const ResponseView view{ex.sys_tokens, ex.sys_token_frames, ex.sys_acoustic, ex.sys_frames};
  const auto w = random_vec(enc.output_width(), rng);
  ParamList<double> params;
  emb.collect(params);
  enc.collect(params);
  auto loss_only = [&] {
    Encoder<double>::Trace tr;
    return weighted_sum(w, enc.forward(view, tr));
  };
  auto loss_grad = [&] {
    zero_grads(params);
    Encoder<double>::Trace tr;
    const auto out = enc.forward(view, tr);
    enc.backward(tr, w);
    return weighted_sum(w, out);
  };
  return {label, gradient_check(params, loss_grad, loss_only, opt)};
}

BlockCheck check_vae(VaeHeads heads, const std::string& label, RngStream& rng,
                     const GradCheckOptions& opt) {
  auto cfg = small_config(Variant::rtnet_vae, EncoderMode::full);
  cfg.vae_heads = heads;
  Vae<double> vae(6, cfg);
  vae.init(rng);
  // Positive biases keep the ReLU heads away from their kink at random inputs.
  for (auto* b : {&vae.reduce.bias, &vae.mu_head.bias, &vae.sigma_head.bias, &vae.expand.bias}) {
    for (auto& v : b->value.values()) v = std::abs(v) + 0.3;
  }
  P input = random_param("vae.input", {6}, rng);
  const auto eps = random_vec(cfg.latent_dim, rng);
  const auto w = random_vec(cfg.hz_dim, rng);
  const double w_kl = 0.7;
  ParamList<double> params;
  vae.collect(params);
  auto loss_only = [&] {
    Vae<double>::Trace tr;
    const auto hz = vae.forward(input.value.span(), eps, tr);
    return weighted_sum(w, hz) + w_kl * vae.kl(tr);
  };
  auto loss_grad = [&] {
    zero_grads(params);
    Vae<double>::Trace tr;
    const auto hz = vae.forward(input.value.span(), eps, tr);
    input.grad.values() = vae.backward(tr, w, w_kl);
    return weighted_sum(w, hz) + w_kl * vae.kl(tr);
  };
  params.push_back(&input);
  return {label, gradient_check(params, loss_grad, loss_only, opt)};
}

BlockCheck check_inference(RngStream& rng, const GradCheckOptions& opt) {
  const auto cfg = small_config(Variant::rtnet, EncoderMode::full);
  InferenceNet<double> net(5, cfg);
  net.init(rng);
  const std::size_t steps = 6;
  P x = random_param("inference.input", {steps, 5}, rng);
  P hz = random_param("inference.hz", {cfg.hz_dim}, rng);
  const auto w = random_vec(steps, rng);
  ParamList<double> params;
  net.collect(params);
  auto loss_only = [&] {
    InferenceNet<double>::Trace tr;
    net.forward(x.value.span(), steps, hz.value.span(), tr);
    return weighted_sum(w, tr.logits);
  };
  auto loss_grad = [&] {
    zero_grads(params);
    x.zero_grad();
    InferenceNet<double>::Trace tr;
    net.forward(x.value.span(), steps, hz.value.span(), tr);
    hz.grad.values() = net.backward(tr, x.value.span(), w, x.grad.span());
    return weighted_sum(w, tr.logits);
  };
  params.push_back(&x);
  params.push_back(&hz);
  return {"inference", gradient_check(params, loss_grad, loss_only, opt)};
}

BlockCheck check_model(Variant variant, EncoderMode mode, const std::string& label, RngStream& rng,
                       const GradCheckOptions& opt) {
  RtNetModel<double> model(small_config(variant, mode));
  model.init(rng.next_u64());
  if (model.is_vae()) {
    for (auto* b : {&model.vae.reduce.bias, &model.vae.mu_head.bias, &model.vae.sigma_head.bias,
                    &model.vae.expand.bias}) {
      for (auto& v : b->value.values()) v = std::abs(v) + 0.3;
    }
  } else {
    for (auto& v : model.reduce.bias.value.values()) v = std::abs(v) + 0.3;
  }
  const auto ex = small_example(rng);
  const auto eps = random_vec(model.config().latent_dim, rng);
  std::span<const double> eps_view = model.is_vae() ? std::span<const double>(eps) : std::span<const double>{};
  const double w_kl = 0.5;
  auto params = model.parameters();
  auto loss_only = [&] { return model.pair_loss(ex, 4, eps_view, w_kl, false).total; };
  auto loss_grad = [&] {
    zero_grads(params);
    return model.pair_loss(ex, 4, eps_view, w_kl, true).total;
  };
  return {label, gradient_check(params, loss_grad, loss_only, opt)};
}

}  // namespace

std::vector<BlockCheck> run_gradcheck_suite(std::uint64_t seed, const GradCheckOptions& options) {
  RngStream rng(seed, 0x6763);
  std::vector<BlockCheck> out;
  out.push_back(check_affine(Activation::none, "affine.none", rng, options));
  out.push_back(check_affine(Activation::relu, "affine.relu", rng, options));
  out.push_back(check_affine(Activation::sigmoid, "affine.sigmoid", rng, options));
  out.push_back(check_embedding(rng, options));
  out.push_back(check_lstm(1, false, false, "lstm.step", rng, options));
  out.push_back(check_lstm(5, false, true, "lstm.sequence", rng, options));
  out.push_back(check_lstm(5, true, false, "lstm.reverse", rng, options));
  out.push_back(check_bilstm(rng, options));
  out.push_back(check_encoder(EncoderMode::full, "encoder.full", rng, options));
  out.push_back(check_encoder(EncoderMode::acoustic_only, "encoder.acoustic", rng, options));
  out.push_back(check_encoder(EncoderMode::linguistic_only, "encoder.linguistic", rng, options));
  out.push_back(check_vae(VaeHeads::linear, "vae.linear", rng, options));
  out.push_back(check_vae(VaeHeads::relu, "vae.relu", rng, options));
  out.push_back(check_vae(VaeHeads::sigma_relu, "vae.sigma_relu", rng, options));
  out.push_back(check_inference(rng, options));
  out.push_back(check_model(Variant::rtnet, EncoderMode::full, "model.rtnet", rng, options));
  out.push_back(check_model(Variant::rtnet, EncoderMode::none, "model.no_encoder", rng, options));
  out.push_back(check_model(Variant::rtnet_vae, EncoderMode::full, "model.rtnet_vae", rng, options));
  return out;
}

}  // namespace rtnet::model
