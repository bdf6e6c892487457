#include "rtnet/substrate/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include "rtnet/substrate/binary_io.hpp"
#include "rtnet/substrate/tensor.hpp"

namespace rtnet {

namespace binio {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path);
}

}  // namespace binio

namespace {
constexpr std::string_view kMagic = "RTNETCKP";
}

const NamedTensor& CheckpointData::tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw FormatError("checkpoint has no tensor named " + name);
}

std::vector<std::uint8_t> encode_checkpoint(const CheckpointData& data) {
  binio::Writer w;
  w.raw(kMagic);
  w.u32(kCheckpointVersion);
  const std::string meta = data.meta.dump();
  w.u64(meta.size());
  w.raw(meta);
  w.u32(static_cast<std::uint32_t>(data.tensors.size()));
  for (const auto& t : data.tensors) {
    require(t.values.size() == Tensor<float>::element_count(t.shape),
            "checkpoint: tensor " + t.name + " value count does not match shape");
    w.str(t.name);
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) w.u64(d);
    w.floats(t.values);
  }
  return w.take();
}

CheckpointData decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  binio::Reader r(bytes);
  if (r.raw(kMagic.size()) != kMagic) throw FormatError("not a checkpoint (bad magic)");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  CheckpointData data;
  const auto meta_len = r.u64();
  data.meta = nlohmann::json::parse(r.raw(meta_len));
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.str();
    const auto rank = r.u32();
    for (std::uint32_t d = 0; d < rank; ++d) t.shape.push_back(r.u64());
    t.values = r.floats(Tensor<float>::element_count(t.shape));
    data.tensors.push_back(std::move(t));
  }
  if (!r.done()) throw FormatError("checkpoint has trailing bytes");
  return data;
}

void write_checkpoint(const std::string& path, const CheckpointData& data) {
  binio::write_file(path, encode_checkpoint(data));
}

CheckpointData read_checkpoint(const std::string& path) {
  return decode_checkpoint(binio::read_file(path));
}

}  // namespace rtnet
