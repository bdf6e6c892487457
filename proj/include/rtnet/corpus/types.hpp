#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rtnet::corpus {

inline constexpr int kFrameMs = 50;
// Pauses of this many frames (200 ms) or more separate IPUs.
inline constexpr int kMinPauseFrames = 4;

enum class Speaker : std::uint8_t { A = 0, B = 1 };

inline Speaker other(Speaker s) { return s == Speaker::A ? Speaker::B : Speaker::A; }
inline std::size_t index(Speaker s) { return static_cast<std::size_t>(s); }
inline const char* to_string(Speaker s) { return s == Speaker::A ? "A" : "B"; }

struct WordAnnotation {
  std::string token;
  int start_ms = 0;
  int end_ms = 0;
  Speaker speaker = Speaker::A;

  bool operator==(const WordAnnotation&) const = default;
};

// Per-speaker frame activity; entry f covers [50f, 50f + 50) ms.
struct SpeechActivity {
  std::array<std::vector<std::uint8_t>, 2> frames;

  std::size_t size() const { return frames[0].size(); }
  const std::vector<std::uint8_t>& of(Speaker s) const { return frames[index(s)]; }
};

struct Ipu {
  Speaker speaker = Speaker::A;
  int start_frame = 0;
  int end_frame = 0;  // inclusive

  int length() const { return end_frame - start_frame + 1; }
  bool operator==(const Ipu&) const = default;
};

struct Turn {
  Speaker speaker = Speaker::A;
  std::vector<Ipu> ipus;

  int start_frame() const { return ipus.front().start_frame; }
  int end_frame() const { return ipus.back().end_frame; }
  bool operator==(const Turn&) const = default;
};

// One user turn and the following system turn. Frame indices are absolute
// (conversation frames).
struct TurnPair {
  Turn user;
  Turn system;
  int r_start_bound = 0;  // first frame of the user's final IPU
  int r_end = 0;          // frame before the system turn starts
  std::optional<std::string> act;

  int system_start() const { return system.start_frame(); }
  int user_last_speech() const { return user.end_frame(); }
  bool span_empty() const { return r_end < r_start_bound; }
  int span_length() const { return r_end - r_start_bound + 1; }
  // Signed gap between the end of the user's speech and the start of the
  // system's; 0 for contiguous speech, negative for overlap.
  int offset_ms() const { return (system_start() - (user_last_speech() + 1)) * kFrameMs; }
  // Labels for frames [from, to]: system activity shifted left by one frame.
  std::vector<std::uint8_t> labels(int from, int to) const;

  bool operator==(const TurnPair&) const = default;
};

struct AcousticMatrix {
  std::size_t frames = 0;
  std::size_t dim = 0;
  std::vector<float> values;  // frames x dim

  const float* row(std::size_t f) const { return values.data() + f * dim; }
  bool operator==(const AcousticMatrix&) const = default;
};

// Dialogue-act tag for a system turn, keyed by the turn's first word onset.
struct ActTag {
  Speaker speaker = Speaker::A;
  int turn_start_ms = 0;
  std::string act;

  bool operator==(const ActTag&) const = default;
};

struct Conversation {
  std::string id;
  std::vector<WordAnnotation> words;
  std::array<AcousticMatrix, 2> acoustic;
  std::vector<ActTag> acts;

  std::vector<WordAnnotation> words_of(Speaker s) const;
  bool operator==(const Conversation&) const = default;
};

}  // namespace rtnet::corpus
