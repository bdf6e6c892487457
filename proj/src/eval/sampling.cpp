#include "rtnet/eval/sampling.hpp"

#include <sstream>

#include "rtnet/substrate/error.hpp"

namespace rtnet::eval {

std::vector<double> masked_probabilities(std::span<const double> probs, int r_start) {
  std::vector<double> out(probs.begin(), probs.end());
  for (int t = 0; t < r_start && t < static_cast<int>(out.size()); ++t) out[static_cast<std::size_t>(t)] = 0.0;
  return out;
}

TriggerResult sample_trigger(std::span<const double> probs, int r_start, RngStream& rng) {
  require(r_start >= 0 && static_cast<std::size_t>(r_start) < probs.size(),
          "sample_trigger: r_start outside the frame sequence");
  const int n = static_cast<int>(probs.size());
  for (int t = r_start; t < n; ++t) {
    if (rng.uniform() < probs[static_cast<std::size_t>(t)]) return {t, false};
  }
  return {n - 1, true};
}

OffsetSample sample_response_offset(const features::PairExample& ex, std::span<const double> probs,
                                    RngStream& rng) {
  require(ex.r_end >= ex.r_start_bound, "sample_response_offset: empty span R");
  require(probs.size() == ex.frames + ex.pad_frames,
          "sample_response_offset: probabilities must cover the padded frames");
  const int r_start = static_cast<int>(rng.uniform_int(ex.r_start_bound, ex.r_end));
  const auto trig = sample_trigger(probs, r_start, rng);
  OffsetSample s;
  s.pair_id = ex.id;
  s.act = ex.act;
  s.offset_ms = ex.offset_for_trigger(trig.trigger);
  s.censored = trig.censored;
  return s;
}

ProbabilitySource model_probabilities(const model::RtNetModel<float>& net) {
  return [&net](const features::PairExample& ex) {
    const auto hz = net.encode(ex);
    return net.probabilities(ex, ex.frames + ex.pad_frames, hz);
  };
}

ProbabilitySource latent_probabilities(const model::RtNetModel<float>& net, std::vector<double> z) {
  auto hz = net.decode_latent(z);
  return [&net, hz = std::move(hz)](const features::PairExample& ex) {
    return net.probabilities(ex, ex.frames + ex.pad_frames, hz);
  };
}

ProbabilitySource constant_probabilities(double p) {
  require(p >= 0.0 && p <= 1.0, "constant_probabilities: p must lie in [0, 1]");
  return [p](const features::PairExample& ex) {
    return std::vector<double>(ex.frames + ex.pad_frames, p);
  };
}

std::vector<OffsetSample> sample_offsets(std::span<const features::PairExample> pairs,
                                         const ProbabilitySource& source, std::size_t runs,
                                         std::uint64_t seed) {
  std::vector<OffsetSample> out;
  out.reserve(pairs.size() * runs);
  std::vector<std::vector<double>> probs;
  probs.reserve(pairs.size());
  for (const auto& ex : pairs) probs.push_back(source(ex));
  for (std::size_t r = 0; r < runs; ++r) {
    const RngStream run_rng(seed, 0x72756e00 + r);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      auto rng = run_rng.derive(i);
      auto s = sample_response_offset(pairs[i], probs[i], rng);
      s.run = r;
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string offsets_to_tsv(const std::vector<OffsetSample>& samples,
                           const std::vector<std::string>& act_names) {
  std::ostringstream os;
  os << "pair_id\tact\toffset_ms\tcensored\n";
  for (const auto& s : samples) {
    const std::string act =
        s.act >= 0 && static_cast<std::size_t>(s.act) < act_names.size() ? act_names[static_cast<std::size_t>(s.act)] : "-";
    os << s.pair_id << '\t' << act << '\t' << s.offset_ms << '\t' << (s.censored ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace rtnet::eval
