#pragma once
// Per-dialogue-act Gaussian approximation of the latent space and the
// attribute-vector operations on it.

#include <string>
#include <vector>

#include "rtnet/substrate/rng.hpp"

namespace rtnet::model {

struct ActGaussian {
  std::string act;
  std::vector<double> mean;
  std::vector<double> stddev;  // maximum-likelihood (population) estimate
  std::size_t samples = 0;

  bool operator==(const ActGaussian&) const = default;
};

struct LatentSpec {
  std::size_t latent_dim = 0;
  std::vector<ActGaussian> acts;

  const ActGaussian& find(const std::string& act) const;  // throws for unknown acts
  bool contains(const std::string& act) const;
  bool operator==(const LatentSpec&) const = default;
};

struct LabeledLatent {
  std::string act;
  std::vector<double> z;
};

struct LatentFit {
  LatentSpec spec;
  std::vector<std::string> skipped;  // acts with fewer than 2 samples
};

// Elementwise mean and population standard deviation per act, acts in order
// of first appearance.
LatentFit fit_latent_spec(const std::vector<LabeledLatent>& samples);

enum class LatentMode { mean, sample };

std::vector<double> latent_vector(const LatentSpec& spec, const std::string& act, RngStream& rng,
                                  LatentMode mode);

// (1 - alpha) * a + alpha * b for both the mean and the stddev.
ActGaussian interpolate(const LatentSpec& spec, const std::string& act_a, const std::string& act_b,
                        double alpha);

// Text form: a '#' header, then one line per act:
//   act <TAB> samples <TAB> mean_1 .. mean_Nz <TAB> std_1 .. std_Nz
std::string latent_spec_to_text(const LatentSpec& spec);
LatentSpec latent_spec_from_text(const std::string& text);

}  // namespace rtnet::model
