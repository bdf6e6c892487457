#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "rtnet/corpus/synth.hpp"
#include "rtnet/model/gradcheck_suite.hpp"
#include "rtnet/model/latent.hpp"
#include "rtnet/model/trainer.hpp"
#include "rtnet/substrate/adam.hpp"
#include "rtnet/substrate/error.hpp"

using namespace rtnet;
using namespace rtnet::model;

namespace {

const features::Dataset& small_dataset() {
  static const features::Dataset ds = [] {
    corpus::SynthConfig cfg;
    cfg.pairs = 100;
    return features::build_dataset(corpus::to_corpus(corpus::generate_synthetic_corpus(cfg)), {});
  }();
  return ds;
}

ModelConfig tiny_config(const features::Dataset& ds) {
  ModelConfig c;
  c.acoustic_dim = ds.acoustic_dim;
  c.vocab_size = ds.vocab.size();
  c.embedding_dim = 4;
  c.acoustic_hidden = 4;
  c.linguistic_hidden = 4;
  c.master_hidden = 4;
  c.hz_dim = 8;
  c.vae_reduce = 6;
  c.latent_dim = 2;
  c.inference_hidden = 8;
  return c;
}

features::PairExample one_word_response(const features::PairExample& base) {
  auto ex = base;
  ex.sys_tokens = {features::kWait, 5, features::kNone};
  ex.sys_token_frames = {-1, 0, -1};
  return ex;
}

}  // namespace

TEST_CASE("config strings and json round-trip") {
  CHECK(parse_variant("rtnet-vae") == Variant::rtnet_vae);
  CHECK(parse_encoder_mode("acoustic") == EncoderMode::acoustic_only);
  CHECK(parse_user_features("both") == UserFeatures::both);
  CHECK_THROWS_AS(parse_variant("lstm"), ContractError);
  CHECK_THROWS_AS(parse_encoder_mode(""), ContractError);
  CHECK(parse_vae_heads("sigma-relu") == VaeHeads::sigma_relu);
  CHECK(to_string(VaeHeads::relu) == "relu");
  CHECK_THROWS_AS(parse_vae_heads("tanh"), ContractError);
  ModelConfig m;
  m.variant = Variant::rtnet_vae;
  m.latent_dim = 3;
  m.vae_heads = VaeHeads::linear;
  CHECK(model_config_from_json(to_json(m)) == m);
  CHECK(to_json(model_config_from_json(to_json(m))) == to_json(m));
  TrainConfig t;
  t.schedule = parse_schedule("100:0.5,200:0.1");
  REQUIRE(t.schedule.size() == 2);
  CHECK(t.schedule[1].first == 200);
  CHECK(t.schedule[1].second == doctest::Approx(0.1));
  CHECK(parse_schedule(format_schedule(t.schedule)) == t.schedule);
  CHECK(parse_schedule("").empty());
  CHECK_THROWS_AS(parse_schedule("10"), ContractError);
  CHECK(to_json(train_config_from_json(to_json(t))) == to_json(t));
  TrainConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("gradient checks pass for every block") {
  const auto checks = run_gradcheck_suite(1);
  CHECK(checks.size() >= 15);
  for (const auto& c : checks) {
    INFO(c.block);
    CHECK(c.report.pass);
    CHECK(c.report.max_rel_error < 1e-4);
  }
}

TEST_CASE("kl_loss examples and scalar oracle") {
  const std::vector<double> zero(4, 0.0), mu{1, 0, 0, 0};
  CHECK(kl_loss<double>(zero, zero) == 0.0);
  CHECK(kl_loss<double>(mu, zero) == 0.125);
  RngStream rng(41, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> m(5), s(5);
    double sum = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      m[i] = rng.uniform(-2, 2);
      s[i] = rng.uniform(-2, 2);
      sum += 1.0 + s[i] - m[i] * m[i] - std::exp(s[i]);
    }
    CHECK(kl_loss<double>(m, s) == doctest::Approx(-sum / 10.0).epsilon(1e-12));
    CHECK(kl_loss<double>(m, s) >= 0.0);
  }
  CHECK_THROWS_AS(kl_loss<double>(mu, std::vector<double>(3)), ContractError);
}

TEST_CASE("vae forward: no noise gives the mean, unit noise has unit spread") {
  ModelConfig cfg;
  cfg.vae_reduce = 5;
  cfg.latent_dim = 3;
  cfg.hz_dim = 4;
  Vae<double> vae(6, cfg);
  RngStream rng(43, 0);
  vae.init(rng);
  const std::vector<double> in{0.3, -0.2, 0.9, 0.1, -0.5, 0.7};
  Vae<double>::Trace tr;
  vae.forward(in, {}, tr);
  CHECK(tr.z == tr.mu);
  CHECK_THROWS_AS(vae.forward(std::vector<double>(5), {}, tr), ContractError);

  // sigma_hat = 0 for every input: zero the sigma head.
  vae.sigma_head.weight.value.fill(0.0);
  vae.sigma_head.bias.value.fill(0.0);
  const int n = 10000;
  std::vector<double> s(3, 0.0), s2(3, 0.0);
  RngStream noise(44, 0);
  for (int i = 0; i < n; ++i) {
    std::vector<double> eps(3);
    for (auto& e : eps) e = noise.normal();
    vae.forward(in, eps, tr);
    for (std::size_t d = 0; d < 3; ++d) {
      const double dz = tr.z[d] - tr.mu[d];
      s[d] += dz;
      s2[d] += dz * dz;
    }
  }
  for (std::size_t d = 0; d < 3; ++d) {
    const double m = s[d] / n;
    CHECK(std::sqrt(s2[d] / n - m * m) == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("vae head activations bound mu and sigma as configured") {
  const std::vector<double> in{0.3, -0.2, 0.9, 0.1, -0.5, 0.7};
  for (const auto heads : {VaeHeads::linear, VaeHeads::relu, VaeHeads::sigma_relu}) {
    CAPTURE(to_string(heads));
    ModelConfig cfg;
    cfg.vae_reduce = 5;
    cfg.latent_dim = 3;
    cfg.vae_heads = heads;
    Vae<double> vae(6, cfg);
    RngStream rng(45, 0);
    vae.init(rng);
    // Push every head pre-activation negative.
    vae.mu_head.bias.value.fill(-10.0);
    vae.sigma_head.bias.value.fill(-10.0);
    Vae<double>::Trace tr;
    vae.forward(in, {}, tr);
    for (std::size_t d = 0; d < 3; ++d) {
      CHECK((tr.mu[d] < 0.0) == (heads != VaeHeads::relu));
      CHECK((tr.sigma[d] < 1.0) == (heads == VaeHeads::linear));
    }
  }
}

TEST_CASE("fit_latent_spec examples") {
  const auto same = fit_latent_spec({{"a", {1.0, 2.0}}, {"a", {1.0, 2.0}}, {"a", {1.0, 2.0}}});
  CHECK(same.spec.find("a").stddev == std::vector<double>{0.0, 0.0});
  const auto two = fit_latent_spec({{"b", {0.0, 0.0}}, {"b", {2.0, 2.0}}, {"lonely", {5.0, 5.0}}});
  CHECK(two.spec.find("b").mean == std::vector<double>{1.0, 1.0});
  CHECK(two.spec.find("b").stddev == std::vector<double>{1.0, 1.0});
  CHECK(two.skipped == std::vector<std::string>{"lonely"});
  CHECK_FALSE(two.spec.contains("lonely"));
  CHECK_THROWS_AS(two.spec.find("lonely"), ContractError);

  RngStream rng(47, 0);
  std::vector<LabeledLatent> draws;
  for (int i = 0; i < 1000; ++i) draws.push_back({"g", {rng.normal(3.0, 2.0), rng.normal(-1.0, 0.5)}});
  const auto g = fit_latent_spec(draws).spec.find("g");
  CHECK(g.mean[0] == doctest::Approx(3.0).epsilon(0.05));
  CHECK(g.mean[1] == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(g.stddev[0] == doctest::Approx(2.0).epsilon(0.05));
  CHECK(g.stddev[1] == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("latent vectors and interpolation") {
  LatentSpec spec;
  spec.latent_dim = 2;
  spec.acts = {{"a", {0.0, 0.0}, {0.1, 0.2}, 10}, {"b", {2.0, 4.0}, {0.3, 0.4}, 10}};
  RngStream rng(53, 0);
  CHECK(latent_vector(spec, "b", rng, LatentMode::mean) == std::vector<double>{2.0, 4.0});
  CHECK(interpolate(spec, "a", "b", 0.0).mean == spec.find("a").mean);
  CHECK(interpolate(spec, "a", "b", 0.0).stddev == spec.find("a").stddev);
  const auto mid = interpolate(spec, "a", "b", 0.5);
  CHECK(mid.mean == std::vector<double>{1.0, 2.0});
  CHECK(mid.stddev[0] == doctest::Approx(0.2));
  CHECK(interpolate(spec, "a", "b", 1.0).mean == spec.find("b").mean);
  CHECK_THROWS_AS(interpolate(spec, "a", "b", 1.5), ContractError);
  CHECK_THROWS_AS(latent_vector(spec, "c", rng, LatentMode::mean), ContractError);
  const auto z = latent_vector(spec, "a", rng, LatentMode::sample);
  CHECK(z.size() == 2);
  CHECK(latent_spec_from_text(latent_spec_to_text(spec)) == spec);
}

TEST_CASE("encoder: one-word response and input validation") {
  const auto& ds = small_dataset();
  RtNetModel<double> net(tiny_config(ds));
  net.init(3);
  const auto ex = one_word_response(ds.train.front());
  RtNetModel<double>::Trace tr;
  const auto concat = net.encoder.forward(net.response_view(ex), tr.encoder);
  const std::size_t w = net.encoder.master.output_width();
  REQUIRE(concat.size() == 3 * w);
  REQUIRE(tr.encoder.master.output.size() == 3 * w);
  // h_I is the last master output, which for WAIT, w, NONE is h_2.
  for (std::size_t k = 0; k < w; ++k) CHECK(concat[2 * w + k] == tr.encoder.master.output[2 * w + k]);

  auto bad = ex;
  bad.sys_tokens = {5, 6, features::kNone};
  CHECK_THROWS_AS(net.encoder.forward(net.response_view(bad), tr.encoder), ContractError);
  bad = ex;
  bad.sys_token_frames = {-1, static_cast<int>(ex.sys_frames), -1};
  CHECK_THROWS_AS(net.encoder.forward(net.response_view(bad), tr.encoder), ContractError);
  bad = ex;
  bad.sys_token_frames.pop_back();
  CHECK_THROWS_AS(net.encoder.forward(net.response_view(bad), tr.encoder), ContractError);
}

TEST_CASE("encoder: a change after token 3 reaches h_0 through the backward direction") {
  const auto& ds = small_dataset();
  RtNetModel<double> net(tiny_config(ds));
  net.init(5);
  auto a = ds.train.front();
  REQUIRE(a.sys_tokens.size() >= 5);
  auto b = a;
  b.sys_tokens[3] = b.sys_tokens[3] == 6 ? 7 : 6;
  RtNetModel<double>::Trace ta, tb;
  net.encoder.forward(net.response_view(a), ta.encoder);
  net.encoder.forward(net.response_view(b), tb.encoder);
  const std::size_t Hl = net.encoder.linguistic.hidden();
  const std::size_t Wm = net.encoder.master.output_width();
  for (std::size_t pos = 0; pos < 3; ++pos) {
    // A unidirectional reading of the tokens is unchanged up to position 2.
    for (std::size_t k = 0; k < Hl; ++k) {
      CHECK(ta.encoder.linguistic.fwd.hidden[pos * Hl + k] == tb.encoder.linguistic.fwd.hidden[pos * Hl + k]);
    }
    bool differs = false;
    for (std::size_t k = 0; k < Wm; ++k) {
      differs = differs || ta.encoder.master.output[pos * Wm + k] != tb.encoder.master.output[pos * Wm + k];
    }
    CHECK(differs);
  }
}

TEST_CASE("encoder mode none gives a zero h_z") {
  const auto& ds = small_dataset();
  auto cfg = tiny_config(ds);
  cfg.encoder_mode = EncoderMode::none;
  RtNetModel<double> net(cfg);
  net.init(2);
  const auto hz = net.encode(ds.train.front());
  CHECK(hz == std::vector<double>(cfg.hz_dim, 0.0));
  cfg.variant = Variant::rtnet_vae;
  CHECK_THROWS_AS(RtNetModel<double>{cfg}, ContractError);
}

TEST_CASE("inference net: zero weights give one half") {
  const auto& ds = small_dataset();
  RtNetModel<double> net(tiny_config(ds));
  net.init(7);
  ParamList<double> ps;
  net.inference.collect(ps);
  for (auto* p : ps) p->value.fill(0.0);
  const auto& ex = ds.train.front();
  const auto y = net.probabilities(ex, ex.frames, net.encode(ex));
  CHECK(y.size() == ex.frames);
  for (double v : y) CHECK(v == 0.5);
  CHECK_THROWS_AS(net.probabilities(ex, ex.frames, std::vector<double>(3)), ContractError);
}

TEST_CASE("pair_loss: untrained BCE near log 2, w_kl zero leaves the total equal to BCE") {
  const auto& ds = small_dataset();
  RtNetModel<float> net(tiny_config(ds));
  net.init(11);
  ParamList<float> ps;
  net.inference.collect(ps);
  for (auto* p : ps) p->value.fill(0.0f);
  const auto& ex = ds.train.front();
  const auto l = net.pair_loss(ex, ex.r_start_bound, {}, 0.0, false);
  CHECK(l.bce == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(l.total == l.bce);
  CHECK_THROWS_AS(net.pair_loss(ex, ex.r_end + 1, {}, 0.0, false), ContractError);
}

TEST_CASE("training lowers the loss on a fixed batch") {
  const auto& ds = small_dataset();
  RtNetModel<float> net(tiny_config(ds));
  net.init(13);
  std::vector<const features::PairExample*> batch;
  for (std::size_t i = 0; i < 8; ++i) batch.push_back(&ds.train[i]);
  AdamConfig ac;
  ac.learning_rate = 5e-3;
  Adam<float> adam(net.parameters(), ac);
  auto eval = [&] {
    double s = 0.0;
    for (const auto* ex : batch) s += net.pair_loss(*ex, ex->r_start_bound, {}, 0.0, false).bce;
    return s / static_cast<double>(batch.size());
  };
  const double before = eval();
  RngStream rng(1, 0);
  for (int it = 0; it < 200; ++it) {
    zero_grads(net.parameters());
    training_step_loss(net, batch, rng, 0.0, true);
    adam.step();
  }
  CHECK(eval() < 0.8 * before);
}

TEST_CASE("trained model: different h_z changes the trigger sequence") {
  const auto& ds = small_dataset();
  TrainConfig tc;
  tc.iterations = 60;
  tc.batch_size = 8;
  tc.learning_rate = 3e-3;
  const auto res = train_model(ds, tiny_config(ds), tc);
  CHECK(res.log.size() == 60);
  const auto& net = *res.model.net;
  const auto& ex = ds.test.front();
  std::vector<float> hz_other(net.config().hz_dim, 0.0f);
  const auto y1 = net.probabilities(ex, ex.frames, net.encode(ex));
  const auto y2 = net.probabilities(ex, ex.frames, hz_other);
  CHECK(y1 != y2);
}

TEST_CASE("training is deterministic and checkpoints round-trip") {
  const auto& ds = small_dataset();
  TrainConfig tc;
  tc.iterations = 15;
  tc.batch_size = 4;
  for (auto variant : {Variant::rtnet, Variant::rtnet_vae}) {
    auto mc = tiny_config(ds);
    mc.variant = variant;
    tc.w_kl = variant == Variant::rtnet_vae ? 0.1 : 0.0;
    const auto a = train_model(ds, mc, tc);
    const auto b = train_model(ds, mc, tc);
    const auto bytes = encode_checkpoint(to_checkpoint(a.model));
    CHECK(bytes == encode_checkpoint(to_checkpoint(b.model)));
    CHECK(format_train_log(a.log) == format_train_log(b.log));

    const auto back = from_checkpoint(decode_checkpoint(bytes));
    CHECK(encode_checkpoint(to_checkpoint(back)) == bytes);
    CHECK(back.act_names == a.model.act_names);
    CHECK(back.vocab == a.model.vocab);
    const auto& ex = ds.test.front();
    CHECK(back.net->probabilities(ex, ex.frames, back.net->encode(ex)) ==
          a.model.net->probabilities(ex, ex.frames, a.model.net->encode(ex)));
  }
  const auto path = std::filesystem::temp_directory_path() / "rtnet_model_roundtrip.ckpt";
  const auto a = train_model(ds, tiny_config(ds), tc);
  save_model(path.string(), a.model);
  CHECK(encode_checkpoint(to_checkpoint(load_model(path.string()))) == encode_checkpoint(to_checkpoint(a.model)));
  std::filesystem::remove(path);
}
