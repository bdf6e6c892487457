#include "rtnet/corpus/segmentation.hpp"

#include <algorithm>

#include "rtnet/substrate/error.hpp"

namespace rtnet::corpus {

std::vector<std::uint8_t> TurnPair::labels(int from, int to) const {
  std::vector<std::uint8_t> out;
  if (to < from) return out;
  out.reserve(static_cast<std::size_t>(to - from + 1));
  for (int f = from; f <= to; ++f) out.push_back(f + 1 >= system_start() ? 1 : 0);
  return out;
}

std::vector<WordAnnotation> Conversation::words_of(Speaker s) const {
  std::vector<WordAnnotation> out;
  for (const auto& w : words) {
    if (w.speaker == s) out.push_back(w);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.start_ms < b.start_ms; });
  return out;
}

SpeechActivity activity_from_words(std::span<const WordAnnotation> words, std::size_t min_frames) {
  std::size_t frames = min_frames;
  std::array<std::vector<const WordAnnotation*>, 2> by_speaker;
  for (const auto& w : words) {
    require(w.start_ms >= 0 && w.start_ms < w.end_ms,
            "word '" + w.token + "' must satisfy 0 <= start_ms < end_ms");
    frames = std::max(frames, static_cast<std::size_t>((w.end_ms - 1) / kFrameMs + 1));
    by_speaker[index(w.speaker)].push_back(&w);
  }
  SpeechActivity act;
  for (auto& f : act.frames) f.assign(frames, 0);
  for (std::size_t s = 0; s < 2; ++s) {
    auto& list = by_speaker[s];
    std::stable_sort(list.begin(), list.end(),
                     [](const auto* a, const auto* b) { return a->start_ms < b->start_ms; });
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i > 0) {
        require(list[i]->start_ms >= list[i - 1]->end_ms,
                "overlapping words for one speaker at " + std::to_string(list[i]->start_ms) + " ms");
      }
      const int first = list[i]->start_ms / kFrameMs;
      const int last = (list[i]->end_ms - 1) / kFrameMs;
      for (int f = first; f <= last; ++f) act.frames[s][static_cast<std::size_t>(f)] = 1;
    }
  }
  return act;
}

std::vector<Ipu> extract_ipus(std::span<const std::uint8_t> activity, Speaker speaker,
                              int min_pause_frames) {
  std::vector<Ipu> ipus;
  const int n = static_cast<int>(activity.size());
  int f = 0;
  while (f < n) {
    if (!activity[static_cast<std::size_t>(f)]) {
      ++f;
      continue;
    }
    int end = f;
    while (end + 1 < n && activity[static_cast<std::size_t>(end + 1)]) ++end;
    if (!ipus.empty() && f - ipus.back().end_frame - 1 < min_pause_frames) {
      ipus.back().end_frame = end;
    } else {
      ipus.push_back({speaker, f, end});
    }
    f = end + 1;
  }
  return ipus;
}

namespace {

// Prefix counts of frames covered by a set of IPUs.
class Coverage {
 public:
  explicit Coverage(std::span<const Ipu> ipus) {
    int last = -1;
    for (const auto& ipu : ipus) last = std::max(last, ipu.end_frame);
    std::vector<int> covered(static_cast<std::size_t>(last + 1), 0);
    for (const auto& ipu : ipus) {
      for (int f = ipu.start_frame; f <= ipu.end_frame; ++f) covered[static_cast<std::size_t>(f)] = 1;
    }
    prefix_.assign(covered.size() + 1, 0);
    for (std::size_t i = 0; i < covered.size(); ++i) prefix_[i + 1] = prefix_[i] + covered[i];
  }

  // Any covered frame in [from, to]?
  bool any(int from, int to) const {
    const int n = static_cast<int>(prefix_.size()) - 1;
    from = std::max(from, 0);
    to = std::min(to, n - 1);
    if (to < from) return false;
    return prefix_[static_cast<std::size_t>(to + 1)] - prefix_[static_cast<std::size_t>(from)] > 0;
  }

 private:
  std::vector<int> prefix_;
};

void build_turns(std::span<const Ipu> own, const Coverage& other, std::vector<Turn>& out) {
  std::vector<Ipu> sorted(own.begin(), own.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Ipu& a, const Ipu& b) { return a.start_frame < b.start_frame; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const bool continues = i > 0 && !other.any(sorted[i - 1].end_frame + 1, sorted[i].start_frame - 1);
    if (continues) {
      out.back().ipus.push_back(sorted[i]);
    } else {
      out.push_back({sorted[i].speaker, {sorted[i]}});
    }
  }
}

}  // namespace

std::vector<Turn> extract_turns(std::span<const Ipu> ipus_a, std::span<const Ipu> ipus_b) {
  std::vector<Turn> turns;
  build_turns(ipus_a, Coverage(ipus_b), turns);
  build_turns(ipus_b, Coverage(ipus_a), turns);
  std::stable_sort(turns.begin(), turns.end(), [](const Turn& a, const Turn& b) {
    if (a.start_frame() != b.start_frame()) return a.start_frame() < b.start_frame();
    return index(a.speaker) < index(b.speaker);
  });
  return turns;
}

PairExtraction extract_turn_pairs(std::span<const Turn> turns) {
  PairExtraction out;
  for (std::size_t i = 0; i + 1 < turns.size(); ++i) {
    if (turns[i].speaker == turns[i + 1].speaker) continue;
    TurnPair pair;
    pair.user = turns[i];
    pair.system = turns[i + 1];
    pair.r_start_bound = pair.user.ipus.back().start_frame;
    pair.r_end = pair.system.start_frame() - 1;
    if (pair.span_empty()) {
      ++out.excluded_empty_span;
      continue;
    }
    out.pairs.push_back(std::move(pair));
  }
  return out;
}

PairExtraction segment_conversation(const Conversation& conv) {
  std::size_t frames = std::max(conv.acoustic[0].frames, conv.acoustic[1].frames);
  const auto activity = activity_from_words(conv.words, frames);
  const auto ipus_a = extract_ipus(activity.of(Speaker::A), Speaker::A);
  const auto ipus_b = extract_ipus(activity.of(Speaker::B), Speaker::B);
  const auto turns = extract_turns(ipus_a, ipus_b);
  auto result = extract_turn_pairs(turns);
  for (auto& pair : result.pairs) {
    for (const auto& tag : conv.acts) {
      if (tag.speaker == pair.system.speaker && tag.turn_start_ms / kFrameMs == pair.system_start()) {
        pair.act = tag.act;
        break;
      }
    }
  }
  return result;
}

std::optional<int> sample_r_start(int r_start_bound, int r_end, RngStream& rng) {
  if (r_end < r_start_bound) return std::nullopt;
  return static_cast<int>(rng.uniform_int(r_start_bound, r_end));
}

std::optional<int> sample_r_start(const TurnPair& pair, RngStream& rng) {
  return sample_r_start(pair.r_start_bound, pair.r_end, rng);
}

}  // namespace rtnet::corpus
