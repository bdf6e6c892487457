#pragma once

#include <span>
#include <vector>

namespace rtnet::features {

// Delay between a word boundary and the moment the simulated recognizer
// reports it.
inline constexpr int kAsrDelayMs = 100;

struct TimedToken {
  int id = 0;
  int start_ms = 0;
  int end_ms = 0;
};

// Per-frame linguistic ids for the user channel. Frames are relative to
// `origin_frame` (absolute frame index of stream position 0).
//
//   * UNSPEC from start_ms + 100 ms (the onset reported by voice activity),
//   * the word's own id from end_ms + 100 ms (the recognition result),
//   * each value is held until the next event; before any event: SIL.
// Events are ordered by time, so a later word's UNSPEC replaces an earlier
// word's id when both fall in the same frame.
std::vector<int> user_linguistic_stream(std::span<const TimedToken> words, int origin_frame,
                                        std::size_t n_frames);

struct SystemTokens {
  std::vector<int> ids;
  std::vector<int> start_frames;  // relative to the turn start; -1 for WAIT and NONE
};

// WAIT, the words with SIL inserted wherever the gap between consecutive
// words exceeds one frame (50 ms), then NONE. `origin_frame` is the absolute
// frame of the response's first frame.
SystemTokens system_token_stream(std::span<const TimedToken> words, int origin_frame);

}  // namespace rtnet::features
