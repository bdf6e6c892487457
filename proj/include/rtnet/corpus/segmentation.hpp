#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rtnet/corpus/types.hpp"
#include "rtnet/substrate/rng.hpp"

namespace rtnet::corpus {

// Frame f of a speaker is active iff one of that speaker's words overlaps
// [50f, 50f + 50). `min_frames` extends the grid (e.g. to the acoustic
// length); otherwise it ends at the last word.
SpeechActivity activity_from_words(std::span<const WordAnnotation> words,
                                   std::size_t min_frames = 0);

// Maximal active runs, merged across pauses shorter than `min_pause_frames`.
std::vector<Ipu> extract_ipus(std::span<const std::uint8_t> activity, Speaker speaker,
                              int min_pause_frames = kMinPauseFrames);

// Consecutive IPUs of one speaker form a turn unless an IPU of the other
// speaker covers a frame of the silence between them. Result sorted by start
// frame (speaker A first on ties).
std::vector<Turn> extract_turns(std::span<const Ipu> ipus_a, std::span<const Ipu> ipus_b);

struct PairExtraction {
  std::vector<TurnPair> pairs;     // usable pairs (non-empty span R)
  std::size_t excluded_empty_span = 0;
};

// Every adjacent pair of turns with different speakers; pairs whose span R is
// empty are dropped and counted.
PairExtraction extract_turn_pairs(std::span<const Turn> turns);

// Full pipeline for one conversation: activity, IPUs, turns, pairs, act tags.
PairExtraction segment_conversation(const Conversation& conv);

// Uniform draw from [r_start_bound, r_end]; nullopt for an empty span.
std::optional<int> sample_r_start(const TurnPair& pair, RngStream& rng);
std::optional<int> sample_r_start(int r_start_bound, int r_end, RngStream& rng);

}  // namespace rtnet::corpus
