#include "rtnet/features/dataset.hpp"

#include <algorithm>
#include <map>

#include "rtnet/corpus/segmentation.hpp"
#include "rtnet/features/streams.hpp"
#include "rtnet/substrate/affine.hpp"
#include "rtnet/substrate/error.hpp"
#include "rtnet/substrate/rng.hpp"

namespace rtnet::features {

using corpus::kFrameMs;

int PairExample::offset_ms() const { return (r_end - user_last_speech) * kFrameMs; }

int PairExample::offset_for_trigger(int trigger) const {
  return (trigger - user_last_speech) * kFrameMs;
}

VocabMap build_vocabulary(const corpus::Corpus& corpus, std::size_t max_vocab, std::uint64_t seed) {
  std::map<std::string, long> counts;
  for (const auto& conv : corpus.conversations) {
    for (const auto& w : conv.words) ++counts[w.token];
  }
  std::vector<std::pair<std::string, long>> ordered(counts.begin(), counts.end());
  auto vocab = VocabMap::from_counts(ordered);
  if (max_vocab > 0 && vocab.size() > max_vocab) {
    Tensor<float> emb({vocab.token_count(), 16});
    RngStream rng(seed, 0x766f63);
    init_uniform(emb, rng, 0.05);
    vocab = merge_vocab(vocab, emb, max_vocab);
  }
  return vocab;
}

std::vector<float> silence_template(const corpus::Corpus& corpus) {
  std::vector<double> sum;
  std::size_t count = 0;
  for (const auto& conv : corpus.conversations) {
    std::size_t frames = std::max(conv.acoustic[0].frames, conv.acoustic[1].frames);
    const auto activity = corpus::activity_from_words(conv.words, frames);
    for (corpus::Speaker s : {corpus::Speaker::A, corpus::Speaker::B}) {
      const auto& m = conv.acoustic[corpus::index(s)];
      if (sum.empty()) sum.assign(m.dim, 0.0);
      require(m.dim == sum.size(), "silence_template: inconsistent acoustic dimension");
      const auto& active = activity.of(s);
      for (std::size_t f = 0; f < m.frames; ++f) {
        if (f < active.size() && active[f]) continue;
        for (std::size_t d = 0; d < m.dim; ++d) sum[d] += m.row(f)[d];
        ++count;
      }
    }
  }
  std::vector<float> out(sum.size(), 0.0f);
  if (count > 0) {
    for (std::size_t d = 0; d < sum.size(); ++d) out[d] = static_cast<float>(sum[d] / static_cast<double>(count));
  }
  return out;
}

namespace {

void copy_rows(const corpus::AcousticMatrix& m, int first, int last, std::size_t dim,
               std::vector<float>& out) {
  out.assign(static_cast<std::size_t>(last - first + 1) * dim, 0.0f);
  for (int f = first; f <= last; ++f) {
    if (f < 0 || static_cast<std::size_t>(f) >= m.frames) continue;
    std::copy_n(m.row(static_cast<std::size_t>(f)), std::min(dim, m.dim),
                out.data() + static_cast<std::size_t>(f - first) * dim);
  }
}

std::vector<TimedToken> words_in(const corpus::Conversation& conv, corpus::Speaker s, int first_frame,
                                 int last_frame, const VocabMap& vocab, std::size_t* unknown) {
  std::vector<TimedToken> out;
  for (const auto& w : conv.words_of(s)) {
    const int f = w.start_ms / kFrameMs;
    if (f < first_frame || f > last_frame) continue;
    int id = vocab.embedding_id_or(w.token, -1);
    if (id < 0) {
      id = kUnspec;
      if (unknown != nullptr) ++*unknown;
    }
    out.push_back({id, w.start_ms, w.end_ms});
  }
  return out;
}

}  // namespace

PairExample make_pair_example(const corpus::Conversation& conv, const corpus::TurnPair& pair,
                              const VocabMap& vocab, std::size_t pad_frames,
                              std::size_t* unknown_tokens) {
  require(!pair.span_empty(), "make_pair_example: pair has an empty span R");
  PairExample ex;
  const int origin = pair.user.start_frame();
  ex.id = conv.id + "@" + std::to_string(pair.system_start());
  const auto& user_m = conv.acoustic[corpus::index(pair.user.speaker)];
  const auto& sys_m = conv.acoustic[corpus::index(pair.system.speaker)];
  require(user_m.dim == sys_m.dim, "make_pair_example: speakers have different acoustic dims");
  ex.acoustic_dim = user_m.dim;
  ex.frames = static_cast<std::size_t>(pair.r_end - origin + 1);
  ex.r_start_bound = pair.r_start_bound - origin;
  ex.r_end = pair.r_end - origin;
  ex.user_last_speech = pair.user_last_speech() - origin;
  ex.pad_frames = pad_frames;
  copy_rows(user_m, origin, pair.r_end, ex.acoustic_dim, ex.user_acoustic);

  const auto user_words =
      words_in(conv, pair.user.speaker, origin, pair.user.end_frame(), vocab, unknown_tokens);
  ex.user_tokens = user_linguistic_stream(user_words, origin, ex.frames + pad_frames);

  const int sys_first = pair.system.start_frame();
  const int sys_last = pair.system.end_frame();
  ex.sys_frames = static_cast<std::size_t>(sys_last - sys_first + 1);
  copy_rows(sys_m, sys_first, sys_last, ex.acoustic_dim, ex.sys_acoustic);
  const auto sys_words = words_in(conv, pair.system.speaker, sys_first, sys_last, vocab, unknown_tokens);
  require(!sys_words.empty(), "make_pair_example: system turn without words");
  auto tokens = system_token_stream(sys_words, sys_first);
  for (auto& f : tokens.start_frames) {
    if (f >= static_cast<int>(ex.sys_frames)) f = static_cast<int>(ex.sys_frames) - 1;
  }
  ex.sys_tokens = std::move(tokens.ids);
  ex.sys_token_frames = std::move(tokens.start_frames);
  return ex;
}

Dataset build_dataset(const corpus::Corpus& corpus, const DatasetOptions& options,
                      const VocabMap* fixed_vocab, const std::vector<std::string>* fixed_acts) {
  Dataset ds;
  ds.vocab = fixed_vocab != nullptr ? *fixed_vocab
                                    : build_vocabulary(corpus, options.max_vocab, options.seed);
  ds.act_names = fixed_acts != nullptr ? *fixed_acts : corpus.act_names();
  ds.silence_template = silence_template(corpus);
  ds.acoustic_dim = ds.silence_template.size();
  ds.report.conversations = corpus.conversations.size();
  for (std::size_t c = 0; c < corpus.conversations.size(); ++c) {
    const auto& conv = corpus.conversations[c];
    const bool is_test = options.test_every > 0 && c % options.test_every == options.test_every - 1;
    auto extraction = corpus::segment_conversation(conv);
    ds.report.excluded_empty_span += extraction.excluded_empty_span;
    for (const auto& pair : extraction.pairs) {
      auto ex = make_pair_example(conv, pair, ds.vocab, options.pad_frames, &ds.report.unknown_tokens);
      if (pair.act) {
        const auto it = std::find(ds.act_names.begin(), ds.act_names.end(), *pair.act);
        if (it != ds.act_names.end()) ex.act = static_cast<int>(it - ds.act_names.begin());
      }
      if (ex.act < 0) ++ds.report.untagged;
      ++ds.report.pairs;
      (is_test ? ds.test : ds.train).push_back(std::move(ex));
    }
  }
  return ds;
}

}  // namespace rtnet::features
