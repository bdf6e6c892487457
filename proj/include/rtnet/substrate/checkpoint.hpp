#pragma once
// Versioned checkpoint container. Byte layout (all integers little-endian):
//
//   "RTNETCKP"                     8-byte magic
//   u32 version                    currently 1
//   u64 meta_length, meta bytes    UTF-8 JSON: config, seed, vocabulary, ...
//   u32 tensor_count
//   per tensor:
//     u32 name_length, name bytes
//     u32 rank, u64 dims[rank]
//     f32 values[prod(dims)]       row-major
//
// See docs/formats.md.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rtnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> values;
};

struct CheckpointData {
  nlohmann::json meta;
  std::vector<NamedTensor> tensors;

  const NamedTensor& tensor(const std::string& name) const;
};

std::vector<std::uint8_t> encode_checkpoint(const CheckpointData& data);
CheckpointData decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const std::string& path, const CheckpointData& data);
CheckpointData read_checkpoint(const std::string& path);

}  // namespace rtnet
