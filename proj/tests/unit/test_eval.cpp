#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "rtnet/corpus/synth.hpp"
#include "rtnet/eval/evaluate.hpp"
#include "rtnet/eval/metrics.hpp"
#include "rtnet/eval/sampling.hpp"
#include "rtnet/substrate/error.hpp"

using namespace rtnet;
using namespace rtnet::eval;

namespace {

features::PairExample span_pair(int bound, int r_end, int user_last) {
  features::PairExample ex;
  ex.id = "p";
  ex.r_start_bound = bound;
  ex.r_end = r_end;
  ex.user_last_speech = user_last;
  ex.frames = static_cast<std::size_t>(r_end) + 1;
  ex.pad_frames = features::kSamplingPadFrames;
  return ex;
}

double brute_ks(std::vector<double> a, std::vector<double> b) {
  std::vector<double> pts = a;
  pts.insert(pts.end(), b.begin(), b.end());
  double d = 0.0;
  for (double x : pts) {
    const double fa = static_cast<double>(std::count_if(a.begin(), a.end(), [&](double v) { return v <= x; })) / a.size();
    const double fb = static_cast<double>(std::count_if(b.begin(), b.end(), [&](double v) { return v <= x; })) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

}  // namespace

TEST_CASE("sample_trigger: certain, impossible, and constant probabilities") {
  RngStream rng(61, 0);
  const std::vector<double> ones(30, 1.0), zeros(30, 0.0);
  for (int r = 0; r < 30; r += 7) {
    const auto t = sample_trigger(ones, r, rng);
    CHECK(t.trigger == r);
    CHECK_FALSE(t.censored);
    const auto z = sample_trigger(zeros, r, rng);
    CHECK(z.trigger == 29);
    CHECK(z.censored);
  }
  CHECK_THROWS_AS(sample_trigger(ones, 30, rng), ContractError);
  const auto masked = masked_probabilities(ones, 5);
  for (int i = 0; i < 5; ++i) CHECK(masked[i] == 0.0);
  CHECK(masked[5] == 1.0);
}

TEST_CASE("constant probability gives a geometric offset from R_START") {
  for (double p : {0.05, 0.2, 0.5}) {
    const std::vector<double> probs(2000, p);
    RngStream rng(67, static_cast<std::uint64_t>(p * 100));
    double sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const int r = static_cast<int>(rng.uniform_int(0, 20));
      sum += sample_trigger(probs, r, rng).trigger - r;
    }
    const double expected = (1.0 - p) / p;
    CHECK(std::abs(sum / n - expected) <= 0.05 * expected);
  }
}

TEST_CASE("sample_response_offset: system speech starts the frame after the trigger") {
  auto ex = span_pair(4, 12, 9);
  std::vector<double> probs(ex.frames + ex.pad_frames, 0.0);
  probs[12] = 1.0;
  RngStream rng(71, 0);
  for (int i = 0; i < 20; ++i) {
    const auto s = sample_response_offset(ex, probs, rng);
    CHECK(s.offset_ms == ex.offset_ms());
    CHECK(s.offset_ms == 150);
  }
  std::fill(probs.begin(), probs.end(), 0.0);
  const auto c = sample_response_offset(ex, probs, rng);
  CHECK(c.censored);
  CHECK(c.offset_ms == (static_cast<int>(probs.size()) - 1 - 9) * 50);
  CHECK_THROWS_AS(sample_response_offset(ex, std::vector<double>(5, 0.5), rng), ContractError);
}

TEST_CASE("fixed-probability baseline examples") {
  const std::vector<features::PairExample> one{span_pair(0, 9, 5)};
  CHECK(fixed_probability_baseline(one).y_fixed == 0.1);
  const std::vector<features::PairExample> two{span_pair(0, 9, 5), span_pair(5, 24, 20)};
  CHECK(fixed_probability_baseline(two).y_fixed == 0.075);
  CHECK_THROWS_AS(fixed_probability_baseline({}), ContractError);
}

TEST_CASE("y_fixed minimizes the constant-predictor BCE on a grid") {
  corpus::SynthConfig cfg;
  cfg.pairs = 100;
  const auto ds = features::build_dataset(corpus::to_corpus(corpus::generate_synthetic_corpus(cfg)), {0});
  std::vector<features::PairExample> pairs(ds.train.begin(), ds.train.begin() + 100);
  const auto base = fixed_probability_baseline(pairs);
  double best_y = 0.0, best = 1e300;
  for (int k = 1; k <= 500; ++k) {
    const double y = k * 0.001;
    const double l = constant_predictor_bce(pairs, y);
    if (l < best) {
      best = l;
      best_y = y;
    }
  }
  CHECK(std::abs(best_y - base.y_fixed) <= 0.001);
  CHECK(base.bce <= best);
}

TEST_CASE("MAE: a source that copies the ground truth scores zero") {
  std::vector<features::PairExample> pairs{span_pair(0, 9, 5), span_pair(3, 30, 31)};
  ProbabilitySource oracle = [](const features::PairExample& ex) {
    std::vector<double> p(ex.frames + ex.pad_frames, 0.0);
    p[static_cast<std::size_t>(ex.r_end)] = 1.0;
    return p;
  };
  const auto m = evaluate_mae(pairs, oracle, 3, 5);
  CHECK(m.mean_s == 0.0);
  CHECK(m.per_run_s.size() == 3);
  CHECK(m.censored == 0);
  const auto c1 = evaluate_mae(pairs, constant_probabilities(0.1), 3, 9);
  const auto c2 = evaluate_mae(pairs, constant_probabilities(0.1), 3, 9);
  CHECK(c1.mean_s == c2.mean_s);
  CHECK(c1.mean_s > 0.0);
}

TEST_CASE("offset_histogram: bins, clamping, normalization") {
  const std::vector<double> x{-2100.0, -24.0, 0.0, 24.9, 25.0, 5000.0};
  const auto h = offset_histogram(x);
  CHECK(h.counts.size() == 121);
  CHECK(h.edges.size() == 122);
  CHECK(h.center(0) == -2000.0);
  CHECK(h.center(120) == 4000.0);
  CHECK(h.counts[0] == 1);
  CHECK(h.counts[40] == 3);
  CHECK(h.counts[41] == 1);
  CHECK(h.counts[120] == 1);
  CHECK(h.out_of_range == 2);
  std::size_t total = 0;
  for (auto c : h.counts) total += c;
  CHECK(total == x.size());
  for (std::size_t k = 0; k + 1 < h.edges.size(); ++k) CHECK(h.edges[k] < h.edges[k + 1]);
  const auto n = h.normalized();
  CHECK(std::accumulate(n.begin(), n.end(), 0.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(offset_histogram({}), ContractError);
}

TEST_CASE("distribution distances") {
  const std::vector<double> a{0.0, 100.0, 250.0}, zeros(5, 0.0), hundreds(5, 100.0);
  const auto same = distribution_distance(a, a);
  CHECK(same.ks == 0.0);
  CHECK(same.emd_ms == 0.0);
  const auto pm = distribution_distance(zeros, hundreds);
  CHECK(pm.ks == 1.0);
  CHECK(pm.emd_ms == doctest::Approx(100.0));
  RngStream rng(73, 0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(10), y(10);
    for (auto& v : x) v = 50.0 * static_cast<double>(rng.uniform_int(-5, 5));
    for (auto& v : y) v = 50.0 * static_cast<double>(rng.uniform_int(-3, 8));
    CHECK(ks_statistic(x, y) == doctest::Approx(brute_ks(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("region cutoffs") {
  std::vector<double> sym;
  for (int k = -10; k <= 10; ++k) {
    for (int r = 0; r < 11 - std::abs(k); ++r) sym.push_back(50.0 * k);
  }
  const auto c = offset_region_cutoffs(sym);
  CHECK(c.mode_ms == 0.0);
  CHECK(std::abs(c.early_cutoff_ms + c.late_cutoff_ms) <= 50.0);

  const std::vector<double> twenty{-300, -250, -200, -150, -100, -100, -50, 0, 100, 100,
                                   100, 100, 150, 200, 250, 300, 350, 400, 600, 800};
  const auto r = offset_region_cutoffs(twenty);
  CHECK(r.mode_ms == 100.0);
  // Below: -300 -250 -200 -150 -100 -100 -50 0 -> median (-150 + -100) / 2.
  CHECK(r.early_cutoff_ms == -125.0);
  // Above: 150 200 250 300 350 400 600 800 -> median (300 + 350) / 2.
  CHECK(r.late_cutoff_ms == 325.0);
  CHECK(r.early_cutoff_ms <= r.mode_ms);
  CHECK(r.mode_ms <= r.late_cutoff_ms);
  CHECK_THROWS_AS(offset_region_cutoffs(std::vector<double>{1.0, 2.0}), ContractError);
  CHECK(histogram_mode(std::vector<double>{0.0, 50.0}) == 0.0);
}
