#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rtnet/substrate/error.hpp"

namespace rtnet {

inline constexpr double kProbClamp = 1e-7;

struct BceResult {
  double value = 0.0;
  std::size_t frames = 0;  // masked-in frames
  bool clamped = false;    // some probability had to be clamped into [1e-7, 1-1e-7]
};

// Mean binary cross entropy over the masked-in frames of one sequence.
template <class T>
BceResult bce_masked(std::span<const T> probs, std::span<const T> targets,
                     std::span<const T> mask) {
  require(probs.size() == targets.size() && probs.size() == mask.size(),
          "bce_masked: sequences must have equal length");
  BceResult r;
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (mask[i] == T(0)) continue;
    double p = static_cast<double>(probs[i]);
    if (p < kProbClamp || p > 1.0 - kProbClamp) {
      p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
      r.clamped = true;
    }
    const double t = static_cast<double>(targets[i]);
    sum -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    ++r.frames;
  }
  require(r.frames > 0, "bce_masked: every frame is masked out");
  r.value = sum / static_cast<double>(r.frames);
  return r;
}

// BCE of one frame given its sigmoid output, with the clamp applied.
template <class T>
double bce_term(T prob, T target) {
  const double p = std::clamp(static_cast<double>(prob), kProbClamp, 1.0 - kProbClamp);
  const double t = static_cast<double>(target);
  return -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
}

// d bce_term / d logit for p = sigmoid(logit). Zero where the clamp is active,
// which is the exact derivative of the clamped loss.
template <class T>
T bce_logit_grad(T prob, T target) {
  const double p = static_cast<double>(prob);
  if (p < kProbClamp || p > 1.0 - kProbClamp) return T(0);
  return prob - target;
}

}  // namespace rtnet
