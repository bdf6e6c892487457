#pragma once
// Synthetic oracle corpus: conversations whose response offsets are drawn
// from known per-act Gaussians, with just enough structure in the features
// for a model to recover them.
//
// Each speaker turn gets a dialogue act. The act decides
//   * the offset of the turn relative to the end of the previous turn,
//   * the words of the turn (a mix of an act-specific and a shared pool),
//   * a "pitch" level in acoustic dimension 2 while the turn is spoken.
// The last `ramp_frames` frames of every turn-final IPU carry a rising ramp in
// acoustic dimension 1, which announces the end of a turn before it happens.
// Dimension 0 is an energy channel (about 1 during speech, about 0 in silence).

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "rtnet/corpus/types.hpp"

namespace rtnet::corpus {

struct ActSpec {
  std::string name;
  double mean_ms = 0.0;
  double std_ms = 0.0;
};

struct SynthConfig {
  std::size_t pairs = 2000;
  std::vector<ActSpec> acts{{"early", -100.0, 150.0}, {"late", 400.0, 150.0}};
  std::size_t acoustic_dim = 4;
  std::size_t shared_words = 24;
  std::size_t act_words = 12;
  double act_word_prob = 0.6;
  std::size_t turns_per_conversation = 21;
  int final_ipu_min_frames = 40;
  int final_ipu_max_frames = 70;
  int ipu_min_frames = 8;
  int ipu_max_frames = 16;
  double second_ipu_prob = 0.4;
  int pause_min_frames = 5;
  int pause_max_frames = 8;
  int ramp_frames = 10;
  double noise_std = 0.05;
  double min_offset_ms = -1000.0;
  std::uint64_t seed = 1;

  void validate() const;
};

nlohmann::json to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);

struct SyntheticCorpus {
  SynthConfig config;
  std::vector<Conversation> conversations;
};

SyntheticCorpus generate_synthetic_corpus(const SynthConfig& cfg);

// Pitch level carried in acoustic dimension 2 for act `act` of `n_acts`.
double act_pitch(std::size_t act, std::size_t n_acts);

}  // namespace rtnet::corpus
