#include "rtnet/corpus/corpus_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rtnet/substrate/binary_io.hpp"
#include "rtnet/substrate/error.hpp"

namespace rtnet::corpus {

namespace {

constexpr std::string_view kAcousticMagic = "RTNACOUS";
constexpr std::uint32_t kAcousticVersion = 1;
constexpr int kFormatVersion = 1;

Speaker parse_speaker(const std::string& s) {
  if (s == "A") return Speaker::A;
  if (s == "B") return Speaker::B;
  throw FormatError("unknown speaker '" + s + "' (expected A or B)");
}

}  // namespace

std::vector<std::string> Corpus::act_names() const {
  std::vector<std::string> names;
  if (meta.contains("acts")) {
    for (const auto& a : meta.at("acts")) names.push_back(a.at("name").get<std::string>());
    return names;
  }
  std::set<std::string> seen;
  for (const auto& c : conversations) {
    for (const auto& t : c.acts) seen.insert(t.act);
  }
  return {seen.begin(), seen.end()};
}

Corpus to_corpus(const SyntheticCorpus& synthetic) {
  Corpus c;
  c.conversations = synthetic.conversations;
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& a : synthetic.config.acts) {
    acts.push_back({{"name", a.name}, {"mean_ms", a.mean_ms}, {"std_ms", a.std_ms}});
  }
  c.meta = {{"format_version", kFormatVersion},
            {"source", "synthetic"},
            {"acts", acts},
            {"generator", to_json(synthetic.config)},
            {"seed", synthetic.config.seed}};
  return c;
}

std::vector<std::uint8_t> encode_acoustic_block(const AcousticMatrix& m) {
  require(m.values.size() == m.frames * m.dim, "acoustic matrix value count does not match dims");
  binio::Writer w;
  w.u32(static_cast<std::uint32_t>(m.frames));
  w.u32(static_cast<std::uint32_t>(m.dim));
  w.floats(m.values);
  return w.take();
}

nlohmann::json conversation_to_json(const Conversation& conv,
                                    const std::array<std::uint64_t, 2>& offsets) {
  nlohmann::json words = {{"A", nlohmann::json::array()}, {"B", nlohmann::json::array()}};
  for (const auto& w : conv.words) {
    words[to_string(w.speaker)].push_back({w.token, w.start_ms, w.end_ms});
  }
  nlohmann::json acoustic = nlohmann::json::object();
  for (Speaker s : {Speaker::A, Speaker::B}) {
    const auto& m = conv.acoustic[index(s)];
    acoustic[to_string(s)] = {{"offset", offsets[index(s)]}, {"frames", m.frames}, {"dim", m.dim}};
  }
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& t : conv.acts) {
    acts.push_back({{"speaker", to_string(t.speaker)}, {"turn_start_ms", t.turn_start_ms}, {"act", t.act}});
  }
  return {{"id", conv.id}, {"words", words}, {"acoustic", acoustic}, {"acts", acts}};
}

void write_corpus(const std::string& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir);
  binio::Writer sidecar;
  sidecar.raw(kAcousticMagic);
  sidecar.u32(kAcousticVersion);
  std::ostringstream lines;
  for (const auto& conv : corpus.conversations) {
    std::array<std::uint64_t, 2> offsets{};
    for (Speaker s : {Speaker::A, Speaker::B}) {
      offsets[index(s)] = sidecar.size();
      const auto block = encode_acoustic_block(conv.acoustic[index(s)]);
      sidecar.raw(std::string_view(reinterpret_cast<const char*>(block.data()), block.size()));
    }
    lines << conversation_to_json(conv, offsets).dump() << '\n';
  }
  const auto path = std::filesystem::path(dir);
  binio::write_file((path / kAcousticFile).string(), sidecar.bytes());
  {
    std::ofstream out(path / kConversationsFile, std::ios::trunc);
    if (!out) throw FormatError("cannot write " + (path / kConversationsFile).string());
    out << lines.str();
  }
  std::ofstream meta(path / kMetaFile, std::ios::trunc);
  if (!meta) throw FormatError("cannot write " + (path / kMetaFile).string());
  meta << corpus.meta.dump(2) << '\n';
}

Corpus read_corpus(const std::string& dir) {
  const auto path = std::filesystem::path(dir);
  Corpus corpus;
  if (std::filesystem::exists(path / kMetaFile)) {
    std::ifstream meta(path / kMetaFile);
    corpus.meta = nlohmann::json::parse(meta);
  }
  const auto sidecar = binio::read_file((path / kAcousticFile).string());
  binio::Reader reader(sidecar);
  if (reader.raw(kAcousticMagic.size()) != kAcousticMagic) {
    throw FormatError("acoustic sidecar has a bad magic number");
  }
  if (reader.u32() != kAcousticVersion) throw FormatError("unsupported acoustic sidecar version");

  std::ifstream in(path / kConversationsFile);
  if (!in) throw FormatError("cannot open " + (path / kConversationsFile).string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Conversation conv;
      conv.id = j.at("id").get<std::string>();
      for (Speaker s : {Speaker::A, Speaker::B}) {
        const auto key = to_string(s);
        if (j.at("words").contains(key)) {
          for (const auto& w : j.at("words").at(key)) {
            conv.words.push_back({w.at(0).get<std::string>(), w.at(1).get<int>(), w.at(2).get<int>(), s});
          }
        }
        const auto& ref = j.at("acoustic").at(key);
        reader.seek(ref.at("offset").get<std::size_t>());
        AcousticMatrix m;
        m.frames = reader.u32();
        m.dim = reader.u32();
        if (m.frames != ref.at("frames").get<std::size_t>() || m.dim != ref.at("dim").get<std::size_t>()) {
          throw FormatError("acoustic block header disagrees with the conversation record");
        }
        m.values = reader.floats(m.frames * m.dim);
        conv.acoustic[index(s)] = std::move(m);
      }
      if (j.contains("acts")) {
        for (const auto& t : j.at("acts")) {
          conv.acts.push_back({parse_speaker(t.at("speaker").get<std::string>()),
                               t.at("turn_start_ms").get<int>(), t.at("act").get<std::string>()});
        }
      }
      // Keep the in-memory word order canonical: speaker A then B, by onset.
      std::stable_sort(conv.words.begin(), conv.words.end(), [](const auto& a, const auto& b) {
        if (a.speaker != b.speaker) return index(a.speaker) < index(b.speaker);
        return a.start_ms < b.start_ms;
      });
      corpus.conversations.push_back(std::move(conv));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("conversations.jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return corpus;
}

}  // namespace rtnet::corpus
