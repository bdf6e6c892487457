#pragma once
// Model-ready turn pairs. All frame indices inside a PairExample are relative
// to the first frame of the user turn.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtnet/corpus/corpus_io.hpp"
#include "rtnet/features/vocab.hpp"

namespace rtnet::features {

// Frames of simulated silence appended to the user features when sampling.
inline constexpr std::size_t kSamplingPadFrames = 80;

struct PairExample {
  std::string id;
  int act = -1;  // index into Dataset::act_names, -1 when untagged
  std::size_t acoustic_dim = 0;

  // User channel over [0, frames): frames == r_end + 1.
  std::size_t frames = 0;
  std::vector<float> user_acoustic;  // frames x acoustic_dim
  // Linguistic ids over [0, frames + pad_frames); the tail continues the
  // stream past the end of the pair.
  std::vector<int> user_tokens;
  std::size_t pad_frames = 0;

  int r_start_bound = 0;
  int r_end = 0;
  int user_last_speech = 0;

  // System response.
  std::vector<int> sys_tokens;
  std::vector<int> sys_token_frames;
  std::vector<float> sys_acoustic;  // sys_frames x acoustic_dim
  std::size_t sys_frames = 0;

  int span_length() const { return r_end - r_start_bound + 1; }
  // Ground-truth offset in ms.
  int offset_ms() const;
  // Offset in ms for a system start triggered at (relative) frame `trigger`:
  // speech starts the frame after the trigger.
  int offset_for_trigger(int trigger) const;
};

struct DatasetOptions {
  // Every test_every-th conversation (index % test_every == test_every - 1)
  // goes to the test split; 0 puts everything in train.
  std::size_t test_every = 5;
  std::size_t max_vocab = 256;
  std::size_t pad_frames = kSamplingPadFrames;
  std::uint64_t seed = 1;  // embedding draw used only for vocabulary merging
};

struct DatasetReport {
  std::size_t conversations = 0;
  std::size_t pairs = 0;
  std::size_t excluded_empty_span = 0;
  std::size_t untagged = 0;
  std::size_t unknown_tokens = 0;
};

struct Dataset {
  std::vector<PairExample> train;
  std::vector<PairExample> test;
  std::vector<std::string> act_names;
  VocabMap vocab;
  std::vector<float> silence_template;  // mean acoustic vector of silent frames
  std::size_t acoustic_dim = 0;
  DatasetReport report;
};

// Vocabulary over every token of the corpus; merged down to `max_vocab`
// embedding rows when larger.
VocabMap build_vocabulary(const corpus::Corpus& corpus, std::size_t max_vocab, std::uint64_t seed);

// Mean of the acoustic frames where the speaker is silent.
std::vector<float> silence_template(const corpus::Corpus& corpus);

// Segments every conversation and builds features. With `fixed_vocab`, tokens
// are resolved against it (unknown tokens map to UNSPEC and are counted);
// otherwise a vocabulary is built from the corpus.
Dataset build_dataset(const corpus::Corpus& corpus, const DatasetOptions& options,
                      const VocabMap* fixed_vocab = nullptr,
                      const std::vector<std::string>* fixed_acts = nullptr);

PairExample make_pair_example(const corpus::Conversation& conv, const corpus::TurnPair& pair,
                              const VocabMap& vocab, std::size_t pad_frames,
                              std::size_t* unknown_tokens = nullptr);

}  // namespace rtnet::features
