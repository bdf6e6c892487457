#pragma once
// Autoregressive trigger sampling and the sweeps built on it.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rtnet/features/dataset.hpp"
#include "rtnet/model/rtnet.hpp"
#include "rtnet/substrate/rng.hpp"

namespace rtnet::eval {

struct TriggerResult {
  int trigger = 0;
  bool censored = false;
};

// y_n with every frame before r_start set to exactly 0.
std::vector<double> masked_probabilities(std::span<const double> probs, int r_start);

// Bernoulli trial u < y_n at every frame from r_start on; the first success
// is the trigger. Without a success the last frame is the trigger and the
// result is censored.
TriggerResult sample_trigger(std::span<const double> probs, int r_start, RngStream& rng);

struct OffsetSample {
  std::string pair_id;
  int act = -1;
  int offset_ms = 0;
  bool censored = false;
  std::size_t run = 0;
};

// y_n for frames [0, frames + pad) of a pair.
using ProbabilitySource = std::function<std::vector<double>(const features::PairExample&)>;

// One sample for one pair: R_START uniform in the span R, then sample_trigger
// over the padded frames.
OffsetSample sample_response_offset(const features::PairExample& ex, std::span<const double> probs,
                                    RngStream& rng);

// h_z from the pair's own response (VAE without sampling noise).
ProbabilitySource model_probabilities(const model::RtNetModel<float>& net);
// h_z decoded from a fixed latent vector, ignoring the pair's response.
ProbabilitySource latent_probabilities(const model::RtNetModel<float>& net, std::vector<double> z);
ProbabilitySource constant_probabilities(double p);

// `runs` samples per pair. The stream for (run r, pair i) is derived from
// (seed, r, i) alone, so results do not depend on evaluation order.
std::vector<OffsetSample> sample_offsets(std::span<const features::PairExample> pairs,
                                         const ProbabilitySource& source, std::size_t runs,
                                         std::uint64_t seed);

// Tab-separated dump: pair_id, act, offset_ms, censored.
std::string offsets_to_tsv(const std::vector<OffsetSample>& samples,
                           const std::vector<std::string>& act_names);

}  // namespace rtnet::eval
