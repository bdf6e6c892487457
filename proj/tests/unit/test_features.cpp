#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "rtnet/corpus/segmentation.hpp"
#include "rtnet/corpus/synth.hpp"
#include "rtnet/features/dataset.hpp"
#include "rtnet/features/streams.hpp"
#include "rtnet/features/vocab.hpp"
#include "rtnet/substrate/affine.hpp"
#include "rtnet/substrate/error.hpp"
#include "rtnet/substrate/rng.hpp"

using namespace rtnet;
using namespace rtnet::features;

namespace {

// Frame-by-frame replay of the recognizer timeline: at every frame, the value
// of the latest event whose (delayed) time falls at or before the frame end.
std::vector<int> replay_stream(const std::vector<TimedToken>& words, std::size_t n) {
  std::vector<int> out(n, kSil);
  for (std::size_t f = 0; f < n; ++f) {
    int best_time = -1, best_order = -1, value = kSil;
    int order = 0;
    for (const auto& w : words) {
      for (auto [t, v] : {std::pair{w.start_ms + 100, kUnspec}, std::pair{w.end_ms + 100, w.id}}) {
        if (t / 50 <= static_cast<int>(f) && (t > best_time || (t == best_time && order > best_order))) {
          best_time = t;
          best_order = order;
          value = v;
        }
        ++order;
      }
    }
    out[f] = value;
  }
  return out;
}

std::map<std::size_t, std::size_t> brute_merge(const std::vector<long>& counts, const Tensor<float>& emb,
                                               std::size_t target) {
  const std::size_t n = counts.size();
  std::map<std::size_t, std::size_t> owner;
  for (std::size_t i = 0; i < n; ++i) owner[i] = i;
  std::vector<long> c = counts;
  std::set<std::size_t> alive;
  for (std::size_t i = kSpecialCount; i < n; ++i) alive.insert(i);
  auto cosine = [&](std::size_t a, std::size_t b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t d = 0; d < emb.cols(); ++d) {
      dot += double(emb.at(a, d)) * emb.at(b, d);
      na += double(emb.at(a, d)) * emb.at(a, d);
      nb += double(emb.at(b, d)) * emb.at(b, d);
    }
    return 1.0 - dot / std::sqrt(na * nb);
  };
  while (alive.size() + kSpecialCount > target) {
    std::vector<std::pair<long, std::size_t>> order;
    for (auto i : alive) order.push_back({c[i], i});
    std::sort(order.begin(), order.end());
    const std::size_t victim = order.front().second;
    std::vector<std::pair<double, std::size_t>> near;
    for (auto j : alive) {
      if (j != victim) near.push_back({cosine(victim, j), j});
    }
    std::sort(near.begin(), near.end());
    const std::size_t keep = near.front().second;
    c[keep] += c[victim];
    alive.erase(victim);
    for (auto& [k, o] : owner) {
      if (o == victim) o = keep;
    }
  }
  return owner;
}

std::vector<TimedToken> random_words(RngStream& rng, std::size_t n) {
  std::vector<TimedToken> w;
  int t = static_cast<int>(rng.uniform_int(0, 200));
  for (std::size_t k = 0; k < n; ++k) {
    const int len = static_cast<int>(rng.uniform_int(20, 400));
    w.push_back({static_cast<int>(kSpecialCount + k), t, t + len});
    t += len + static_cast<int>(rng.uniform_int(0, 180));
  }
  return w;
}

}  // namespace

TEST_CASE("user_linguistic_stream: one word from 200 to 400 ms") {
  const std::vector<TimedToken> w{{7, 200, 400}};
  const auto s = user_linguistic_stream(w, 0, 14);
  for (int f = 0; f < 6; ++f) CHECK(s[f] == kSil);
  for (int f = 6; f <= 9; ++f) CHECK(s[f] == kUnspec);
  for (int f = 10; f < 14; ++f) CHECK(s[f] == 7);
  const auto shifted = user_linguistic_stream(w, 4, 4);
  CHECK(shifted == std::vector<int>{kSil, kSil, kUnspec, kUnspec});
  CHECK(user_linguistic_stream({}, 0, 5) == std::vector<int>(5, kSil));
}

TEST_CASE("user_linguistic_stream: the next onset preempts a held id") {
  const std::vector<TimedToken> w{{5, 0, 120}, {6, 150, 300}};
  const auto s = user_linguistic_stream(w, 0, 10);
  // UNSPEC at 100 ms (frame 2); word 5 at 220 ms (frame 4); UNSPEC at 250 ms
  // (frame 5); word 6 at 400 ms (frame 8).
  CHECK(s == std::vector<int>{kSil, kSil, kUnspec, kUnspec, 5, kUnspec, kUnspec, kUnspec, 6, 6});
}

TEST_CASE("user_linguistic_stream equals an event-timeline replay") {
  RngStream rng(17, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto words = random_words(rng, 6);
    const std::size_t n = static_cast<std::size_t>(words.back().end_ms / 50 + 8);
    const auto s = user_linguistic_stream(words, 0, n);
    CHECK(s == replay_stream(words, n));
    for (std::size_t f = 0; f < n; ++f) {
      for (const auto& w : words) {
        if (s[f] == w.id) CHECK(static_cast<int>(f) >= (w.end_ms + kAsrDelayMs) / 50);
      }
    }
  }
}

TEST_CASE("system_token_stream examples") {
  const std::vector<TimedToken> contiguous{{10, 1000, 1200}, {11, 1200, 1400}};
  const auto a = system_token_stream(contiguous, 20);
  CHECK(a.ids == std::vector<int>{kWait, 10, 11, kNone});
  CHECK(a.start_frames == std::vector<int>{-1, 0, 4, -1});
  const std::vector<TimedToken> gap{{10, 1000, 1200}, {11, 1320, 1400}};
  CHECK(system_token_stream(gap, 20).ids == std::vector<int>{kWait, 10, kSil, 11, kNone});
  const std::vector<TimedToken> short_gap{{10, 1000, 1200}, {11, 1250, 1400}};
  CHECK(system_token_stream(short_gap, 20).ids == std::vector<int>{kWait, 10, 11, kNone});
  CHECK_THROWS_AS(system_token_stream({}, 0), ContractError);
}

TEST_CASE("system_token_stream SIL count equals the gap census") {
  RngStream rng(19, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto words = random_words(rng, static_cast<std::size_t>(rng.uniform_int(1, 8)));
    std::size_t census = 0;
    for (std::size_t i = 1; i < words.size(); ++i) census += words[i].start_ms - words[i - 1].end_ms > 50 ? 1 : 0;
    const auto s = system_token_stream(words, words.front().start_ms / 50);
    CHECK(static_cast<std::size_t>(std::count(s.ids.begin(), s.ids.end(), kSil)) == census);
    CHECK(s.ids.front() == kWait);
    CHECK(s.ids.back() == kNone);
    CHECK(std::count(s.ids.begin(), s.ids.end(), kWait) == 1);
    CHECK(std::count(s.ids.begin(), s.ids.end(), kNone) == 1);
    CHECK(s.ids.size() == words.size() + census + 2);
  }
}

TEST_CASE("vocabulary specials and lookup") {
  const auto v = VocabMap::from_counts({{"a", 3}, {"b", 1}});
  CHECK(v.size() == kSpecialCount + 2);
  CHECK(v.embedding_id("a") == 4);
  CHECK(v.embedding_id_or("zzz", kUnspec) == kUnspec);
  CHECK_THROWS_AS(v.embedding_id("zzz"), ContractError);
  CHECK_THROWS_AS(VocabMap::from_counts({{"a", 1}, {"a", 2}}), ContractError);
  CHECK(VocabMap::from_tsv(v.to_tsv()) == v);
}

TEST_CASE("merge_vocab: identity at the current size, duplicates merge first") {
  const auto v = VocabMap::from_counts({{"x", 5}, {"y", 1}, {"z", 9}});
  Tensor<float> emb({v.token_count(), 2});
  for (std::size_t i = 0; i < v.token_count(); ++i) emb.at(i, 0) = 1.0f;
  emb.at(4, 1) = 1.0f;   // x
  emb.at(5, 1) = -1.0f;  // y
  emb.at(6, 1) = 1.0f;   // z, same direction as x
  const auto same = merge_vocab(v, emb, v.size());
  CHECK(same == v);
  const auto merged = merge_vocab(v, emb, v.size() - 1);
  CHECK(merged.size() == v.size() - 1);
  CHECK(merged.merged_into(5) != 5);
  const auto two = VocabMap::from_counts({{"p", 1}, {"q", 4}, {"r", 4}});
  Tensor<float> e2({two.token_count(), 2});
  e2.at(4, 0) = 1.0f;
  e2.at(5, 1) = 1.0f;
  e2.at(6, 0) = 2.0f;  // duplicate direction of p
  const auto m2 = merge_vocab(two, e2, kSpecialCount + 2);
  CHECK(m2.merged_into(4) == 6);
  CHECK(m2.count(6) == 5);
  for (std::size_t i = 0; i < kSpecialCount; ++i) CHECK(m2.merged_into(i) == static_cast<int>(i));
  CHECK_THROWS_AS(merge_vocab(two, e2, kSpecialCount), ContractError);
}

TEST_CASE("merge_vocab equals a brute-force greedy reference") {
  RngStream rng(23, 0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::pair<std::string, long>> tc;
    for (int i = 0; i < 50; ++i) tc.push_back({"t" + std::to_string(i), static_cast<long>(rng.uniform_int(1, 30))});
    const auto v = VocabMap::from_counts(tc);
    Tensor<float> emb({v.token_count(), 8});
    init_uniform(emb, rng, 1.0);
    const std::size_t target = kSpecialCount + 20;
    const auto m = merge_vocab(v, emb, target);
    CHECK(m.size() == target);
    std::vector<long> counts;
    for (std::size_t i = 0; i < v.token_count(); ++i) counts.push_back(v.count(i));
    const auto ref = brute_merge(counts, emb, target);
    for (std::size_t i = 0; i < v.token_count(); ++i) CHECK(m.merged_into(i) == static_cast<int>(ref.at(i)));
  }
}

TEST_CASE("dataset pairs satisfy the feature invariants") {
  corpus::SynthConfig cfg;
  cfg.pairs = 200;
  const auto corp = corpus::to_corpus(corpus::generate_synthetic_corpus(cfg));
  DatasetOptions opt;
  const auto ds = build_dataset(corp, opt);
  CHECK(ds.act_names == std::vector<std::string>{"early", "late"});
  CHECK(ds.train.size() + ds.test.size() == ds.report.pairs);
  CHECK(ds.report.pairs == 200);
  CHECK(ds.silence_template.size() == cfg.acoustic_dim);
  CHECK(std::abs(ds.silence_template[0]) < 0.1);
  for (const auto* split : {&ds.train, &ds.test}) {
    for (const auto& ex : *split) {
      CHECK(ex.frames == static_cast<std::size_t>(ex.r_end) + 1);
      CHECK(ex.user_acoustic.size() == ex.frames * ex.acoustic_dim);
      CHECK(ex.user_tokens.size() == ex.frames + ex.pad_frames);
      CHECK(ex.pad_frames == kSamplingPadFrames);
      CHECK(ex.r_start_bound <= ex.r_end);
      CHECK(ex.user_last_speech >= ex.r_start_bound);
      CHECK(ex.sys_tokens.front() == kWait);
      CHECK(ex.sys_tokens.back() == kNone);
      CHECK(ex.sys_tokens.size() == ex.sys_token_frames.size());
      CHECK(ex.offset_for_trigger(ex.r_end) == ex.offset_ms());
      CHECK((ex.act == 0 || ex.act == 1));
      for (int id : ex.user_tokens) CHECK(static_cast<std::size_t>(id) < ds.vocab.size());
    }
  }
  const auto again = build_dataset(corp, opt);
  REQUIRE(again.test.size() == ds.test.size());
  for (std::size_t i = 0; i < ds.test.size(); ++i) {
    CHECK(again.test[i].id == ds.test[i].id);
    CHECK(again.test[i].user_acoustic == ds.test[i].user_acoustic);
  }
}

TEST_CASE("vocabulary merging kicks in above max_vocab") {
  corpus::SynthConfig cfg;
  cfg.pairs = 100;
  const auto corp = corpus::to_corpus(corpus::generate_synthetic_corpus(cfg));
  const auto full = build_vocabulary(corp, 256, 1);
  const auto small = build_vocabulary(corp, kSpecialCount + 10, 1);
  CHECK(full.size() > kSpecialCount + 10);
  CHECK(small.size() == kSpecialCount + 10);
  CHECK(small.token_count() == full.token_count());
}
