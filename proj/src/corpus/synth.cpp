#include "rtnet/corpus/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rtnet/substrate/error.hpp"
#include "rtnet/substrate/rng.hpp"

namespace rtnet::corpus {

void SynthConfig::validate() const {
  require(pairs > 0, "synth: pairs must be positive");
  require(acts.size() >= 2, "synth: at least two dialogue acts are required");
  for (const auto& a : acts) {
    require(!a.name.empty(), "synth: act names must be non-empty");
    require(a.std_ms >= 0.0, "synth: act '" + a.name + "' has negative std_ms");
  }
  require(acoustic_dim >= 3, "synth: acoustic_dim must be at least 3 (energy, ramp, pitch)");
  require(shared_words > 0 && act_words > 0, "synth: word pools must be non-empty");
  require(act_word_prob >= 0.0 && act_word_prob <= 1.0, "synth: act_word_prob must be in [0,1]");
  require(turns_per_conversation >= 2, "synth: turns_per_conversation must be at least 2");
  require(final_ipu_min_frames >= 2 && final_ipu_min_frames <= final_ipu_max_frames,
          "synth: invalid final IPU length range");
  require(ipu_min_frames >= 2 && ipu_min_frames <= ipu_max_frames, "synth: invalid IPU length range");
  require(pause_min_frames >= kMinPauseFrames && pause_min_frames <= pause_max_frames,
          "synth: intra-turn pauses must be at least 200 ms");
  require(ramp_frames >= 1, "synth: ramp_frames must be positive");
  require(noise_std >= 0.0, "synth: noise_std must be non-negative");
  require(second_ipu_prob >= 0.0 && second_ipu_prob <= 1.0, "synth: second_ipu_prob must be in [0,1]");
  require(min_offset_ms <= 0.0, "synth: min_offset_ms must be <= 0");
  // Overlapping starts must still land inside the previous final IPU.
  require(-std::floor(min_offset_ms / kFrameMs) < final_ipu_min_frames,
          "synth: min_offset_ms allows overlaps longer than the shortest final IPU");
}

nlohmann::json to_json(const SynthConfig& c) {
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& a : c.acts) acts.push_back({{"name", a.name}, {"mean_ms", a.mean_ms}, {"std_ms", a.std_ms}});
  return {{"pairs", c.pairs},
          {"acts", acts},
          {"acoustic_dim", c.acoustic_dim},
          {"shared_words", c.shared_words},
          {"act_words", c.act_words},
          {"act_word_prob", c.act_word_prob},
          {"turns_per_conversation", c.turns_per_conversation},
          {"final_ipu_min_frames", c.final_ipu_min_frames},
          {"final_ipu_max_frames", c.final_ipu_max_frames},
          {"ipu_min_frames", c.ipu_min_frames},
          {"ipu_max_frames", c.ipu_max_frames},
          {"second_ipu_prob", c.second_ipu_prob},
          {"pause_min_frames", c.pause_min_frames},
          {"pause_max_frames", c.pause_max_frames},
          {"ramp_frames", c.ramp_frames},
          {"noise_std", c.noise_std},
          {"min_offset_ms", c.min_offset_ms},
          {"seed", c.seed}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.acts.clear();
  for (const auto& a : j.at("acts")) {
    c.acts.push_back({a.at("name").get<std::string>(), a.at("mean_ms").get<double>(),
                      a.at("std_ms").get<double>()});
  }
  c.pairs = j.at("pairs").get<std::size_t>();
  c.acoustic_dim = j.at("acoustic_dim").get<std::size_t>();
  c.shared_words = j.at("shared_words").get<std::size_t>();
  c.act_words = j.at("act_words").get<std::size_t>();
  c.act_word_prob = j.at("act_word_prob").get<double>();
  c.turns_per_conversation = j.at("turns_per_conversation").get<std::size_t>();
  c.final_ipu_min_frames = j.at("final_ipu_min_frames").get<int>();
  c.final_ipu_max_frames = j.at("final_ipu_max_frames").get<int>();
  c.ipu_min_frames = j.at("ipu_min_frames").get<int>();
  c.ipu_max_frames = j.at("ipu_max_frames").get<int>();
  c.second_ipu_prob = j.at("second_ipu_prob").get<double>();
  c.pause_min_frames = j.at("pause_min_frames").get<int>();
  c.pause_max_frames = j.at("pause_max_frames").get<int>();
  c.ramp_frames = j.at("ramp_frames").get<int>();
  c.noise_std = j.at("noise_std").get<double>();
  c.min_offset_ms = j.at("min_offset_ms").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

double act_pitch(std::size_t act, std::size_t n_acts) {
  if (n_acts < 2) return 0.0;
  return -1.0 + 2.0 * static_cast<double>(act) / static_cast<double>(n_acts - 1);
}

namespace {

struct PlannedTurn {
  Speaker speaker;
  std::size_t act;
  std::vector<Ipu> ipus;
};

int draw_int(RngStream& rng, int lo, int hi) { return static_cast<int>(rng.uniform_int(lo, hi)); }

std::string pick_token(const SynthConfig& cfg, std::size_t act, RngStream& rng) {
  char buf[64];
  if (rng.uniform() < cfg.act_word_prob) {
    const auto k = rng.uniform_int(0, static_cast<std::int64_t>(cfg.act_words) - 1);
    std::snprintf(buf, sizeof buf, "%s_%lld", cfg.acts[act].name.c_str(), static_cast<long long>(k));
  } else {
    const auto k = rng.uniform_int(0, static_cast<std::int64_t>(cfg.shared_words) - 1);
    std::snprintf(buf, sizeof buf, "w%lld", static_cast<long long>(k));
  }
  return buf;
}

// Fills [50*first, 50*(last+1)) ms with words. The first and last frames are
// always speech; internal gaps stay below 150 ms so the span is one IPU.
void emit_words(const SynthConfig& cfg, const PlannedTurn& turn, const Ipu& ipu, RngStream& rng,
                std::vector<WordAnnotation>& out) {
  const int begin = ipu.start_frame * kFrameMs;
  const int end = (ipu.end_frame + 1) * kFrameMs;
  int t = begin;
  while (t < end) {
    int w_end = std::min(end, t + draw_int(rng, 150, 400));
    if (end - w_end < 100) w_end = end;
    out.push_back({pick_token(cfg, turn.act, rng), t, w_end, turn.speaker});
    t = w_end;
    if (t < end && rng.uniform() < 0.3) t += draw_int(rng, 10, 100);
    if (t >= end - 50) {
      out.back().end_ms = end;
      t = end;
    }
  }
}

Conversation realize(const SynthConfig& cfg, const std::vector<PlannedTurn>& turns,
                     std::size_t conv_index, RngStream& rng) {
  Conversation conv;
  char id[32];
  std::snprintf(id, sizeof id, "syn%05zu", conv_index);
  conv.id = id;
  int last_frame = 0;
  for (const auto& t : turns) last_frame = std::max(last_frame, t.ipus.back().end_frame);
  const std::size_t frames = static_cast<std::size_t>(last_frame + 11);
  const std::size_t dim = cfg.acoustic_dim;
  for (auto& m : conv.acoustic) {
    m.frames = frames;
    m.dim = dim;
    m.values.resize(frames * dim);
    for (auto& v : m.values) v = static_cast<float>(rng.normal(0.0, cfg.noise_std));
  }
  for (std::size_t k = 0; k < turns.size(); ++k) {
    const auto& turn = turns[k];
    auto& m = conv.acoustic[index(turn.speaker)];
    const double pitch = act_pitch(turn.act, cfg.acts.size());
    for (std::size_t i = 0; i < turn.ipus.size(); ++i) {
      const auto& ipu = turn.ipus[i];
      const bool final_ipu = i + 1 == turn.ipus.size();
      for (int f = ipu.start_frame; f <= ipu.end_frame; ++f) {
        float* row = m.values.data() + static_cast<std::size_t>(f) * dim;
        row[0] += 1.0f;
        row[2] += static_cast<float>(pitch);
        const int from_end = ipu.end_frame - f;
        if (final_ipu && from_end < cfg.ramp_frames) {
          row[1] += static_cast<float>(cfg.ramp_frames - from_end) / static_cast<float>(cfg.ramp_frames);
        }
      }
      emit_words(cfg, turn, ipu, rng, conv.words);
    }
    if (k > 0) {
      conv.acts.push_back({turn.speaker, turn.ipus.front().start_frame * kFrameMs, cfg.acts[turn.act].name});
    }
  }
  std::stable_sort(conv.words.begin(), conv.words.end(), [](const auto& a, const auto& b) {
    if (a.speaker != b.speaker) return index(a.speaker) < index(b.speaker);
    return a.start_ms < b.start_ms;
  });
  return conv;
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SynthConfig& cfg) {
  cfg.validate();
  SyntheticCorpus corpus;
  corpus.config = cfg;
  RngStream rng(cfg.seed, 0);
  std::size_t remaining = cfg.pairs;
  std::size_t conv_index = 0;
  while (remaining > 0) {
    const std::size_t n_turns = std::min(cfg.turns_per_conversation, remaining + 1);
    std::vector<PlannedTurn> turns;
    std::array<int, 2> last_end{-100, -100};
    Speaker speaker = Speaker::A;
    for (std::size_t k = 0; k < n_turns; ++k) {
      PlannedTurn turn{speaker, static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cfg.acts.size()) - 1)), {}};
      int start = 2;
      int prev_last = -1;
      if (k > 0) {
        const auto& prev = turns.back();
        prev_last = prev.ipus.back().end_frame;
        const auto& act = cfg.acts[turn.act];
        const double offset_ms = std::max(cfg.min_offset_ms, rng.normal(act.mean_ms, act.std_ms));
        const int offset_frames = static_cast<int>(std::lround(offset_ms / kFrameMs));
        start = prev_last + 1 + offset_frames;
        // Keep the span R non-empty and keep this speaker's previous turn a
        // separate IPU.
        start = std::max(start, prev.ipus.back().start_frame + 1);
        start = std::max(start, last_end[index(speaker)] + cfg.pause_min_frames);
      }
      const bool two_ipus = rng.uniform() < cfg.second_ipu_prob;
      int cursor = start;
      if (two_ipus) {
        int len = draw_int(rng, cfg.ipu_min_frames, cfg.ipu_max_frames);
        // The pause after the first IPU must not contain the other speaker.
        len = std::max(len, prev_last + 1 - start + 1);
        turn.ipus.push_back({speaker, cursor, cursor + len - 1});
        cursor += len + draw_int(rng, cfg.pause_min_frames, cfg.pause_max_frames);
      }
      const int final_len = draw_int(rng, cfg.final_ipu_min_frames, cfg.final_ipu_max_frames);
      turn.ipus.push_back({speaker, cursor, cursor + final_len - 1});
      last_end[index(speaker)] = turn.ipus.back().end_frame;
      turns.push_back(std::move(turn));
      speaker = other(speaker);
    }
    corpus.conversations.push_back(realize(cfg, turns, conv_index, rng));
    remaining -= n_turns - 1;
    ++conv_index;
  }
  return corpus;
}

}  // namespace rtnet::corpus
