#pragma once
// Finite-difference verification of every trainable block in 64-bit
// precision: affine layers, embeddings, LSTM step and sequence, Bi-LSTM, the
// encoder stack, the VAE heads, the inference network, and both complete
// models.

#include <cstdint>
#include <string>
#include <vector>

#include "rtnet/substrate/gradcheck.hpp"

namespace rtnet::model {

struct BlockCheck {
  std::string block;
  GradCheckReport report;
};

std::vector<BlockCheck> run_gradcheck_suite(std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace rtnet::model
