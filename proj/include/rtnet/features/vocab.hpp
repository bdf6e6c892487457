#pragma once

#include <map>
#include <string>
#include <vector>

#include "rtnet/substrate/tensor.hpp"

namespace rtnet::features {

// Reserved embedding ids.
inline constexpr int kSil = 0;
inline constexpr int kWait = 1;
inline constexpr int kNone = 2;
inline constexpr int kUnspec = 3;
inline constexpr std::size_t kSpecialCount = 4;

// Token inventory with optional merging of rare tokens. Every token keeps its
// original index; `embedding_id` resolves a token to the compact id of the
// surviving token it was merged into (itself if it survived).
class VocabMap {
 public:
  VocabMap();

  // Specials first, then tokens in the order given.
  static VocabMap from_counts(const std::vector<std::pair<std::string, long>>& token_counts);

  std::size_t token_count() const { return tokens_.size(); }   // original entries
  std::size_t size() const { return compact_size_; }           // embedding rows
  const std::string& token(std::size_t original) const { return tokens_[original]; }
  long count(std::size_t original) const { return counts_[original]; }
  int merged_into(std::size_t original) const { return rep_[original]; }
  bool contains(const std::string& token) const { return index_.count(token) > 0; }

  // Compact id for a token. Throws ContractError for unknown tokens.
  int embedding_id(const std::string& token) const;
  // Compact id, or `fallback` when the token is unknown.
  int embedding_id_or(const std::string& token, int fallback) const;
  int embedding_id_of_original(std::size_t original) const { return compact_[static_cast<std::size_t>(rep_[original])]; }

  // Tab-separated: token, original id, count, original id of the token it
  // was merged into (its own id when it survived).
  std::string to_tsv() const;
  static VocabMap from_tsv(const std::string& text);

  friend VocabMap merge_vocab(const VocabMap& base, const Tensor<float>& embeddings,
                              std::size_t target_size);

  bool operator==(const VocabMap&) const = default;

 private:
  void rebuild_compact();

  std::vector<std::string> tokens_;
  std::vector<long> counts_;
  std::vector<int> rep_;      // representative original index
  std::vector<int> compact_;  // original index -> compact id (survivors only)
  std::size_t compact_size_ = 0;
  std::map<std::string, int> index_;
};

// Repeatedly merges the lowest-count surviving non-special token (lowest
// index on ties) into its nearest surviving non-special neighbour by cosine
// distance (lowest index on ties) until `target_size` embedding rows remain.
// The survivor takes over the merged token's count. `embeddings` has one row
// per original token.
VocabMap merge_vocab(const VocabMap& base, const Tensor<float>& embeddings, std::size_t target_size);

}  // namespace rtnet::features
