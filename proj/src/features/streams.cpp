#include "rtnet/features/streams.hpp"

#include <algorithm>

#include "rtnet/corpus/types.hpp"
#include "rtnet/features/vocab.hpp"
#include "rtnet/substrate/error.hpp"

namespace rtnet::features {

namespace {

int frame_of(int ms) {
  // Floor division; times are non-negative in practice.
  return ms >= 0 ? ms / corpus::kFrameMs : -((-ms + corpus::kFrameMs - 1) / corpus::kFrameMs);
}

struct Event {
  int time_ms;
  std::size_t order;
  int value;
};

}  // namespace

std::vector<int> user_linguistic_stream(std::span<const TimedToken> words, int origin_frame,
                                        std::size_t n_frames) {
  std::vector<Event> events;
  events.reserve(words.size() * 2);
  for (const auto& w : words) {
    require(w.start_ms < w.end_ms, "user_linguistic_stream: word with start_ms >= end_ms");
    events.push_back({w.start_ms + kAsrDelayMs, events.size(), kUnspec});
    events.push_back({w.end_ms + kAsrDelayMs, events.size(), w.id});
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.time_ms != b.time_ms) return a.time_ms < b.time_ms;
    return a.order < b.order;
  });
  std::vector<int> stream(n_frames, kSil);
  int current = kSil;
  std::size_t next = 0;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const int abs_frame = origin_frame + static_cast<int>(f);
    while (next < events.size() && frame_of(events[next].time_ms) <= abs_frame) {
      current = events[next].value;
      ++next;
    }
    stream[f] = current;
  }
  return stream;
}

SystemTokens system_token_stream(std::span<const TimedToken> words, int origin_frame) {
  require(!words.empty(), "system_token_stream: empty response");
  SystemTokens out;
  out.ids.push_back(kWait);
  out.start_frames.push_back(-1);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) {
      const int gap = words[i].start_ms - words[i - 1].end_ms;
      if (gap > corpus::kFrameMs) {
        out.ids.push_back(kSil);
        out.start_frames.push_back(std::max(0, frame_of(words[i - 1].end_ms) - origin_frame));
      }
    }
    out.ids.push_back(words[i].id);
    out.start_frames.push_back(std::max(0, frame_of(words[i].start_ms) - origin_frame));
  }
  out.ids.push_back(kNone);
  out.start_frames.push_back(-1);
  return out;
}

}  // namespace rtnet::features
