#pragma once
// On-disk corpus: a directory holding
//   conversations.jsonl  one conversation per line (words, act tags, and
//                        references into the acoustic sidecar)
//   acoustic.bin         little-endian float32 frame matrices
//   meta.json            corpus-level metadata (act inventory, generator
//                        config and seed for synthetic corpora)
// The layouts are documented in docs/formats.md.

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "rtnet/corpus/synth.hpp"
#include "rtnet/corpus/types.hpp"

namespace rtnet::corpus {

inline constexpr const char* kConversationsFile = "conversations.jsonl";
inline constexpr const char* kAcousticFile = "acoustic.bin";
inline constexpr const char* kMetaFile = "meta.json";

struct Corpus {
  std::vector<Conversation> conversations;
  nlohmann::json meta = nlohmann::json::object();

  // Act names in inventory order: from meta["acts"] when present, otherwise
  // the sorted set of tags seen in the conversations.
  std::vector<std::string> act_names() const;
};

Corpus to_corpus(const SyntheticCorpus& synthetic);

void write_corpus(const std::string& dir, const Corpus& corpus);
Corpus read_corpus(const std::string& dir);

// Serialized forms, exposed for tests and converters.
nlohmann::json conversation_to_json(const Conversation& conv, const std::array<std::uint64_t, 2>& offsets);
std::vector<std::uint8_t> encode_acoustic_block(const AcousticMatrix& m);

}  // namespace rtnet::corpus
