#include "rtnet/features/vocab.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rtnet/substrate/error.hpp"

namespace rtnet::features {

VocabMap::VocabMap() {
  for (const char* s : {"<SIL>", "<WAIT>", "<NONE>", "<UNSPEC>"}) {
    index_[s] = static_cast<int>(tokens_.size());
    rep_.push_back(static_cast<int>(tokens_.size()));
    tokens_.emplace_back(s);
    counts_.push_back(0);
  }
  rebuild_compact();
}

VocabMap VocabMap::from_counts(const std::vector<std::pair<std::string, long>>& token_counts) {
  VocabMap v;
  for (const auto& [tok, count] : token_counts) {
    require(!v.contains(tok), "vocabulary: duplicate token '" + tok + "'");
    const int id = static_cast<int>(v.tokens_.size());
    v.index_[tok] = id;
    v.tokens_.push_back(tok);
    v.counts_.push_back(count);
    v.rep_.push_back(id);
  }
  v.rebuild_compact();
  return v;
}

void VocabMap::rebuild_compact() {
  compact_.assign(tokens_.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (rep_[i] == static_cast<int>(i)) compact_[i] = next++;
  }
  compact_size_ = static_cast<std::size_t>(next);
}

int VocabMap::embedding_id(const std::string& token) const {
  const auto it = index_.find(token);
  require(it != index_.end(), "vocabulary: unknown token '" + token + "'");
  return embedding_id_of_original(static_cast<std::size_t>(it->second));
}

int VocabMap::embedding_id_or(const std::string& token, int fallback) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return fallback;
  return embedding_id_of_original(static_cast<std::size_t>(it->second));
}

std::string VocabMap::to_tsv() const {
  std::ostringstream out;
  out << "# token\tid\tcount\tmerged_into\n";
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << tokens_[i] << '\t' << i << '\t' << counts_[i] << '\t' << rep_[i] << '\n';
  }
  return out.str();
}

VocabMap VocabMap::from_tsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> tokens;
  std::vector<long> counts;
  std::vector<int> reps;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string tok;
    long id = 0, count = 0;
    int merged = 0;
    if (!std::getline(row, tok, '\t') || !(row >> id >> count >> merged)) {
      throw FormatError("vocabulary: malformed line '" + line + "'");
    }
    if (id != static_cast<long>(tokens.size())) throw FormatError("vocabulary: ids must be consecutive");
    tokens.push_back(tok);
    counts.push_back(count);
    reps.push_back(merged);
  }
  if (tokens.size() < kSpecialCount) throw FormatError("vocabulary: missing special tokens");
  VocabMap v;
  v.tokens_ = tokens;
  v.counts_ = counts;
  v.rep_ = reps;
  v.index_.clear();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    v.index_[tokens[i]] = static_cast<int>(i);
    const int r = reps[i];
    if (r < 0 || static_cast<std::size_t>(r) >= tokens.size() || reps[static_cast<std::size_t>(r)] != r) {
      throw FormatError("vocabulary: token '" + tokens[i] + "' is merged into a non-survivor");
    }
  }
  v.rebuild_compact();
  return v;
}

VocabMap merge_vocab(const VocabMap& base, const Tensor<float>& embeddings, std::size_t target_size) {
  require(target_size >= kSpecialCount + 1,
          "merge_vocab: target size must exceed the number of special tokens");
  require(embeddings.rows() == base.token_count(),
          "merge_vocab: need one embedding row per original token");
  VocabMap v = base;
  const std::size_t n = v.token_count();
  const std::size_t dim = embeddings.cols();
  std::vector<double> norms(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) s += double(embeddings.at(i, d)) * embeddings.at(i, d);
    norms[i] = std::sqrt(s);
  }
  auto cosine_distance = [&](std::size_t a, std::size_t b) {
    double dot = 0.0;
    for (std::size_t d = 0; d < dim; ++d) dot += double(embeddings.at(a, d)) * embeddings.at(b, d);
    const double denom = norms[a] * norms[b];
    return denom > 0.0 ? 1.0 - dot / denom : 1.0;
  };
  std::vector<long> counts = v.counts_;
  while (v.size() > target_size) {
    int victim = -1;
    for (std::size_t i = kSpecialCount; i < n; ++i) {
      if (v.rep_[i] != static_cast<int>(i)) continue;
      if (victim < 0 || counts[i] < counts[static_cast<std::size_t>(victim)]) victim = static_cast<int>(i);
    }
    int nearest = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = kSpecialCount; j < n; ++j) {
      if (static_cast<int>(j) == victim || v.rep_[j] != static_cast<int>(j)) continue;
      const double d = cosine_distance(static_cast<std::size_t>(victim), j);
      if (d < best) {
        best = d;
        nearest = static_cast<int>(j);
      }
    }
    require(nearest >= 0, "merge_vocab: no merge partner left");
    counts[static_cast<std::size_t>(nearest)] += counts[static_cast<std::size_t>(victim)];
    for (auto& r : v.rep_) {
      if (r == victim) r = nearest;
    }
    v.rebuild_compact();
  }
  v.counts_ = counts;
  return v;
}

}  // namespace rtnet::features
