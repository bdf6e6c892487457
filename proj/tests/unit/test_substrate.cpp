#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "rtnet/substrate/adam.hpp"
#include "rtnet/substrate/affine.hpp"
#include "rtnet/substrate/checkpoint.hpp"
#include "rtnet/substrate/embedding.hpp"
#include "rtnet/substrate/gradcheck.hpp"
#include "rtnet/substrate/kernels.hpp"
#include "rtnet/substrate/loss.hpp"
#include "rtnet/substrate/lstm.hpp"
#include "rtnet/substrate/rng.hpp"

using namespace rtnet;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Gate equations written out element by element, independent of Lstm::step.
void reference_lstm_step(const Lstm<double>& cell, const std::vector<double>& x,
                         const std::vector<double>& h_prev, const std::vector<double>& c_prev,
                         std::vector<double>& h, std::vector<double>& c) {
  const std::size_t H = cell.hidden(), D = cell.input();
  h.assign(H, 0.0);
  c.assign(H, 0.0);
  auto pre = [&](std::size_t row) {
    double s = cell.bias.value[row];
    for (std::size_t d = 0; d < D; ++d) s += cell.w_ih.value.at(row, d) * x[d];
    for (std::size_t k = 0; k < H; ++k) s += cell.w_hh.value.at(row, k) * h_prev[k];
    return s;
  };
  for (std::size_t k = 0; k < H; ++k) {
    const double i = sig(pre(k));
    const double f = sig(pre(H + k));
    const double g = std::tanh(pre(2 * H + k));
    const double o = sig(pre(3 * H + k));
    c[k] = f * c_prev[k] + i * g;
    h[k] = o * std::tanh(c[k]);
  }
}

std::vector<double> random_vector(std::size_t n, RngStream& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("tensor value count equals the product of the shape") {
  Tensor<float> t({3, 4});
  CHECK(t.size() == 12);
  CHECK(t.rows() == 3);
  CHECK(t.cols() == 4);
  CHECK_THROWS_AS(Tensor<float>({2, 2}, std::vector<float>(3)), ContractError);
  Parameter<double> p("p", {2, 5});
  CHECK(p.grad.shape() == p.value.shape());
}

TEST_CASE("rng streams are reproducible and independent") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    differs = differs || va != c.next_u64();
  }
  CHECK(differs);
  RngStream u(1, 0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    const auto k = u.uniform_int(-3, 3);
    CHECK(k >= -3);
    CHECK(k <= 3);
  }
}

TEST_CASE("derived rng streams are reproducible") {
  const RngStream base(5, 3);
  auto a = base.derive(9);
  auto b = base.derive(9);
  auto c = base.derive(10);
  const double n1 = a.normal();
  CHECK(n1 == b.normal());
  CHECK(std::isfinite(n1));
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() != c.next_u64());
}

TEST_CASE("normal draws have unit variance") {
  RngStream rng(3, 1);
  double s = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  const double m = s / n;
  CHECK(std::abs(m) < 0.03);
  CHECK(std::abs(s2 / n - m * m - 1.0) < 0.05);
}

TEST_CASE("lstm_step: zero parameters give zero state") {
  Lstm<double> cell("z", 3, 2);
  const std::vector<double> x{0.3, -1.0, 2.0}, h0(2, 0.0), c0(2, 0.0);
  const auto [h, c] = lstm_step<double>(x, h0, c0, cell);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(h[k] == 0.0);
    CHECK(c[k] == 0.0);
  }
}

TEST_CASE("lstm_step: saturated forget gate keeps the cell") {
  Lstm<double> cell("s", 2, 2);
  for (std::size_t k = 0; k < 2; ++k) {
    cell.bias.value[k] = -20.0;     // input gate closed
    cell.bias.value[2 + k] = 20.0;  // forget gate open
  }
  const std::vector<double> x{0.5, -0.5}, h0{0.1, 0.2}, c0{0.7, -1.3};
  const auto [h, c] = lstm_step<double>(x, h0, c0, cell);
  CHECK(c[0] == doctest::Approx(0.7).epsilon(1e-7));
  CHECK(c[1] == doctest::Approx(-1.3).epsilon(1e-7));
}

TEST_CASE("lstm_step matches the scalar gate equations") {
  RngStream rng(11, 0);
  Lstm<double> cell("r", 3, 3);
  cell.init(rng);
  const auto x = random_vector(3, rng), h0 = random_vector(3, rng), c0 = random_vector(3, rng);
  std::vector<double> h_ref, c_ref;
  reference_lstm_step(cell, x, h0, c0, h_ref, c_ref);
  const auto [h, c] = lstm_step<double>(x, h0, c0, cell);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(h[k] == doctest::Approx(h_ref[k]).epsilon(1e-12));
    CHECK(c[k] == doctest::Approx(c_ref[k]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(lstm_step<double>(std::vector<double>(2), h0, c0, cell), ContractError);
}

TEST_CASE("bilstm_sequence: length one is one forward and one backward step") {
  RngStream rng(2, 0);
  BiLstm<double> layer("b", 2, 3);
  layer.init(rng);
  const std::vector<std::vector<double>> seq{{0.4, -0.8}};
  const auto out = bilstm_sequence(seq, layer);
  REQUIRE(out.size() == 1);
  const std::vector<double> zero(3, 0.0);
  const auto f = lstm_step<double>(seq[0], zero, zero, layer.fwd).first;
  const auto b = lstm_step<double>(seq[0], zero, zero, layer.bwd).first;
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(out[0][k] == doctest::Approx(f[k]).epsilon(1e-12));
    CHECK(out[0][3 + k] == doctest::Approx(b[k]).epsilon(1e-12));
  }
}

TEST_CASE("bilstm_sequence equals two unidirectional runs") {
  RngStream rng(4, 0);
  BiLstm<double> layer("b", 3, 2);
  layer.init(rng);
  std::vector<std::vector<double>> seq;
  for (int t = 0; t < 4; ++t) seq.push_back(random_vector(3, rng));
  const auto out = bilstm_sequence(seq, layer);
  REQUIRE(out.size() == 4);
  std::vector<double> h(2, 0.0), c(2, 0.0);
  for (std::size_t t = 0; t < 4; ++t) {
    std::tie(h, c) = lstm_step<double>(seq[t], h, c, layer.fwd);
    for (std::size_t k = 0; k < 2; ++k) CHECK(out[t][k] == doctest::Approx(h[k]).epsilon(1e-12));
  }
  h.assign(2, 0.0);
  c.assign(2, 0.0);
  for (std::size_t n = 0; n < 4; ++n) {
    const std::size_t t = 3 - n;
    std::tie(h, c) = lstm_step<double>(seq[t], h, c, layer.bwd);
    for (std::size_t k = 0; k < 2; ++k) CHECK(out[t][2 + k] == doctest::Approx(h[k]).epsilon(1e-12));
  }
}

TEST_CASE("bilstm_sequence: reversing the input swaps the directions") {
  RngStream rng(5, 0);
  BiLstm<double> layer("b", 2, 2);
  layer.init(rng);
  layer.bwd.w_ih.value = layer.fwd.w_ih.value;
  layer.bwd.w_hh.value = layer.fwd.w_hh.value;
  layer.bwd.bias.value = layer.fwd.bias.value;
  std::vector<std::vector<double>> seq;
  for (int t = 0; t < 5; ++t) seq.push_back(random_vector(2, rng));
  auto rev = seq;
  std::reverse(rev.begin(), rev.end());
  const auto a = bilstm_sequence(seq, layer);
  const auto b = bilstm_sequence(rev, layer);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(a[t][2 + k] == doctest::Approx(b[4 - t][k]).epsilon(1e-12));
    }
  }
  CHECK(a.size() == seq.size());
  CHECK_THROWS_AS(bilstm_sequence(std::vector<std::vector<double>>{}, layer), ContractError);
}

TEST_CASE("affine_activation examples") {
  Tensor<double> eye({2, 2}, {1, 0, 0, 1});
  Tensor<double> zero({2});
  const std::vector<double> x{-1.0, 2.0};
  const auto y = affine_activation<double>(x, eye, zero, Activation::relu);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 2.0);
  const auto s = affine_activation<double>(std::vector<double>{0.0, 0.0}, Tensor<double>({3, 2}), Tensor<double>({3}),
                                           Activation::sigmoid);
  for (double v : s) CHECK(v == 0.5);
  CHECK_THROWS_AS(affine_activation<double>(std::vector<double>{1.0}, eye, zero, Activation::none), ContractError);
}

TEST_CASE("affine_activation matches a scalar dot-product oracle") {
  RngStream rng(8, 0);
  Tensor<double> w({3, 2}), b({3});
  init_uniform(w, rng, 1.0);
  init_uniform(b, rng, 1.0);
  const auto x = random_vector(2, rng);
  for (auto kind : {Activation::none, Activation::relu, Activation::sigmoid}) {
    const auto y = affine_activation<double>(x, w, b, kind);
    for (std::size_t r = 0; r < 3; ++r) {
      double z = b[r];
      for (std::size_t c = 0; c < 2; ++c) z += w.at(r, c) * x[c];
      const double want = kind == Activation::relu ? std::max(z, 0.0) : kind == Activation::sigmoid ? sig(z) : z;
      CHECK(y[r] == doctest::Approx(want).epsilon(1e-14));
    }
  }
}

TEST_CASE("bce_masked examples") {
  const std::vector<double> p{0.5, 0.5}, t{0, 1}, m{1, 1};
  CHECK(bce_masked<double>(p, t, m).value == doctest::Approx(0.693147).epsilon(1e-6));
  const std::vector<double> p2{0.9, 0.2, 0.7}, t2{1, 0, 1}, m2{1, 1, 0};
  const double hand = 0.5 * (-std::log(0.9) - std::log(0.8));
  CHECK(bce_masked<double>(p2, t2, m2).value == doctest::Approx(hand).epsilon(1e-12));
  CHECK(bce_masked<double>(p2, t2, m2).value == doctest::Approx(0.164252).epsilon(1e-6));
  const std::vector<double> exact{1.0, 0.0}, exact_t{1.0, 0.0};
  const auto r = bce_masked<double>(exact, exact_t, m);
  CHECK(r.clamped);
  CHECK(r.value >= 0.0);
  CHECK(r.value < 1e-6);
  CHECK_THROWS_AS(bce_masked<double>(p, t, std::vector<double>{0, 0}), ContractError);
}

TEST_CASE("bce_masked is non-negative") {
  RngStream rng(9, 0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(6), t(6), m(6, 1.0);
    for (std::size_t i = 0; i < 6; ++i) {
      p[i] = rng.uniform();
      t[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    CHECK(bce_masked<double>(p, t, m).value >= 0.0);
  }
}

TEST_CASE("adam: first step moves by the learning rate") {
  Parameter<double> w("w", {1});
  w.value[0] = 0.5;
  w.grad[0] = 1.0;
  AdamConfig cfg;
  cfg.learning_rate = 1e-3;
  Adam<double> adam({&w}, cfg);
  adam.step();
  CHECK(w.value[0] == doctest::Approx(0.5 - 1e-3).epsilon(1e-6));
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Parameter<double> w("w", {3});
  w.value.values() = {1.0, -2.0, 3.0};
  Adam<double> adam({&w}, AdamConfig{});
  for (int i = 0; i < 5; ++i) adam.step();
  CHECK(w.value.values() == std::vector<double>{1.0, -2.0, 3.0});
  CHECK(adam.first_moments()[0].size() == w.size());
  CHECK_NOTHROW(Adam<double>({}, AdamConfig{}).step());
}

TEST_CASE("adam: descends monotonically on w^2") {
  Parameter<double> w("w", {1});
  w.value[0] = 1.0;
  AdamConfig cfg;
  cfg.learning_rate = 0.05;
  Adam<double> adam({&w}, cfg);
  double prev = w.value[0];
  for (int i = 0; i < 10; ++i) {
    w.grad[0] = 2.0 * w.value[0];
    adam.step();
    CHECK(w.value[0] < prev);
    CHECK(w.value[0] > 0.0);
    prev = w.value[0];
  }
}

TEST_CASE("adam: schedule factors and L2") {
  AdamConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.schedule = {{10, 0.1}, {20, 0.1}};
  Parameter<double> w("w", {1});
  Adam<double> adam({&w}, cfg);
  CHECK(adam.rate_at(0) == 1.0);
  CHECK(adam.rate_at(10) == doctest::Approx(0.1));
  CHECK(adam.rate_at(25) == doctest::Approx(0.01));
  CHECK_THROWS_AS(Adam<double>({&w}, AdamConfig{0.0}), ContractError);

  Parameter<double> v("v", {1});
  v.value[0] = 2.0;
  AdamConfig l2cfg;
  l2cfg.learning_rate = 1e-2;
  l2cfg.l2 = 0.5;
  Adam<double> decay({&v}, l2cfg);
  decay.step();
  CHECK(v.value[0] < 2.0);
}

TEST_CASE("gradient_check: affine and lstm step pass, constant loss is zero") {
  RngStream rng(12, 0);
  Affine<double> layer("a", 3, 2, Activation::sigmoid);
  layer.init(rng);
  const auto x = random_vector(3, rng);
  const std::vector<double> w{0.7, -1.1};
  auto loss = [&] {
    const auto y = layer.forward(x);
    return w[0] * y[0] + w[1] * y[1];
  };
  auto loss_grad = [&] {
    layer.weight.zero_grad();
    layer.bias.zero_grad();
    const auto y = layer.forward(x);
    layer.backward(x, y, w);
    return w[0] * y[0] + w[1] * y[1];
  };
  const auto rep = gradient_check({&layer.weight, &layer.bias}, loss_grad, loss);
  CHECK(rep.pass);
  CHECK(rep.max_rel_error < 1e-4);

  Lstm<double> cell("l", 2, 3);
  cell.init(rng);
  const auto xs = random_vector(2, rng);
  const auto wh = random_vector(3, rng);
  auto l_loss = [&] {
    Lstm<double>::Trace tr;
    cell.forward(xs, 1, false, {}, tr);
    return std::inner_product(wh.begin(), wh.end(), tr.hidden.begin(), 0.0);
  };
  auto l_grad = [&] {
    ParamList<double> ps;
    cell.collect(ps);
    zero_grads(ps);
    Lstm<double>::Trace tr;
    cell.forward(xs, 1, false, {}, tr);
    cell.backward(tr, xs, wh, {}, {});
    return std::inner_product(wh.begin(), wh.end(), tr.hidden.begin(), 0.0);
  };
  ParamList<double> ps;
  cell.collect(ps);
  CHECK(gradient_check(ps, l_grad, l_loss).max_rel_error < 1e-4);

  Parameter<double> p("c", {4});
  auto constant = [&] {
    p.zero_grad();
    return 3.0;
  };
  const auto crep = gradient_check({&p}, constant, [] { return 3.0; });
  CHECK(crep.pass);
  CHECK(crep.entries[0].max_abs_analytic == 0.0);
}

TEST_CASE("gradient_check reports a wrong gradient") {
  Parameter<double> p("p", {2});
  p.value.values() = {1.0, 2.0};
  auto loss = [&] { return p.value[0] * p.value[0] + p.value[1]; };
  auto wrong = [&] {
    p.grad.values() = {2.0 * p.value[0], 0.5};
    return loss();
  };
  const auto rep = gradient_check({&p}, wrong, loss);
  CHECK_FALSE(rep.pass);
  CHECK(relative_error(1.0, 1.0) == 0.0);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!kernels::avx2::supported()) {
    MESSAGE("AVX2 not available on this CPU; scalar kernels only");
    return;
  }
  RngStream rng(21, 0);
  for (std::size_t rows : {1u, 3u, 4u, 7u, 33u}) {
    for (std::size_t cols : {1u, 5u, 8u, 17u, 64u}) {
      std::vector<float> a(rows * cols), x(cols), v(rows), y0(rows), y1(rows), t0(cols), t1(cols);
      for (auto& e : a) e = static_cast<float>(rng.uniform(-1, 1));
      for (auto& e : x) e = static_cast<float>(rng.uniform(-1, 1));
      for (auto& e : v) e = static_cast<float>(rng.uniform(-1, 1));
      for (std::size_t i = 0; i < rows; ++i) y0[i] = y1[i] = static_cast<float>(i);
      kernels::scalar::gemv_acc(a.data(), rows, cols, x.data(), y0.data());
      kernels::avx2::gemv_acc(a.data(), rows, cols, x.data(), y1.data());
      for (std::size_t i = 0; i < rows; ++i) CHECK(y1[i] == doctest::Approx(y0[i]).epsilon(1e-5));
      kernels::scalar::gemv_t_acc(a.data(), rows, cols, v.data(), t0.data());
      kernels::avx2::gemv_t_acc(a.data(), rows, cols, v.data(), t1.data());
      for (std::size_t i = 0; i < cols; ++i) CHECK(t1[i] == doctest::Approx(t0[i]).epsilon(1e-5));
      auto b0 = a, b1 = a;
      kernels::scalar::ger_acc(b0.data(), rows, cols, v.data(), x.data());
      kernels::avx2::ger_acc(b1.data(), rows, cols, v.data(), x.data());
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(b1[i] == doctest::Approx(b0[i]).epsilon(1e-5));
      CHECK(kernels::avx2::dot(a.data(), a.data(), a.size()) ==
            doctest::Approx(kernels::scalar::dot(a.data(), a.data(), a.size())).epsilon(1e-5));
      auto z0 = x, z1 = x;
      kernels::scalar::axpy(0.3f, t0.data(), z0.data(), cols);
      kernels::avx2::axpy(0.3f, t0.data(), z1.data(), cols);
      for (std::size_t i = 0; i < cols; ++i) CHECK(z1[i] == doctest::Approx(z0[i]).epsilon(1e-5));
    }
  }
}

TEST_CASE("kernel selection can be pinned") {
  const auto before = kernels::active();
  CHECK(kernels::select(kernels::Isa::scalar));
  CHECK(kernels::active() == kernels::Isa::scalar);
  CHECK(kernels::name(kernels::Isa::scalar) == "scalar");
  if (kernels::avx2::supported()) CHECK(kernels::select(kernels::Isa::avx2));
  kernels::select(before);
}

TEST_CASE("embedding lookup and gradient accumulation") {
  Embedding<double> e("e", 4, 2);
  RngStream rng(1, 0);
  e.init(rng);
  for (double v : e.table.value.values()) CHECK(std::abs(v) <= 0.05);
  e.accumulate(2, std::vector<double>{1.0, -1.0});
  e.accumulate(2, std::vector<double>{0.5, 0.5});
  CHECK(e.table.grad.at(2, 0) == 1.5);
  CHECK(e.table.grad.at(2, 1) == -0.5);
  CHECK_THROWS_AS(e.lookup(4), ContractError);
}

TEST_CASE("checkpoint container round-trips and rejects corruption") {
  CheckpointData d;
  d.meta = {{"seed", 7}, {"note", "x"}};
  d.tensors.push_back({"a", {2, 3}, {1, 2, 3, 4, 5, 6}});
  d.tensors.push_back({"b", {1}, {-0.25f}});
  const auto bytes = encode_checkpoint(d);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "RTNETCKP");
  const auto back = decode_checkpoint(bytes);
  CHECK(back.meta == d.meta);
  CHECK(back.tensor("a").values == d.tensors[0].values);
  CHECK(back.tensor("b").shape == std::vector<std::size_t>{1});
  CHECK(encode_checkpoint(back) == bytes);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), FormatError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  CHECK_THROWS_AS(decode_checkpoint(truncated), FormatError);
}
