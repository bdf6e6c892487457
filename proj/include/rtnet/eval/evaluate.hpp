#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtnet/eval/metrics.hpp"
#include "rtnet/eval/sampling.hpp"
#include "rtnet/model/trainer.hpp"

namespace rtnet::eval {

struct LossReport {
  double bce = 0.0;
  double kl = 0.0;
  std::size_t pairs = 0;
};

// Test protocol: R_START fixed at the start of the user's final IPU, no VAE
// sampling noise. Per-pair mean BCE, then mean over pairs.
LossReport evaluate_losses(const model::RtNetModel<float>& net,
                           std::span<const features::PairExample> pairs);

struct BaselineResult {
  double y_fixed = 0.0;
  double bce = 0.0;
};

// y_fixed = mean over pairs of 1/|R| (R_START at the final-IPU start) and the
// test-protocol BCE of predicting y_fixed at every frame.
BaselineResult fixed_probability_baseline(std::span<const features::PairExample> pairs);
double constant_predictor_bce(std::span<const features::PairExample> pairs, double y);

struct MaeResult {
  std::vector<double> per_run_s;
  double mean_s = 0.0;
  std::size_t samples = 0;
  std::size_t censored = 0;
};

// Mean absolute error (seconds) between sampled and ground-truth offsets, per
// run and averaged over runs. Censored samples count at their censored value.
MaeResult mae_from_samples(std::span<const features::PairExample> pairs,
                           const std::vector<OffsetSample>& samples, std::size_t runs);

MaeResult evaluate_mae(std::span<const features::PairExample> pairs, const ProbabilitySource& source,
                       std::size_t runs, std::uint64_t seed);

struct EvalOptions {
  std::size_t runs = 3;
  std::uint64_t seed = 1;
};

// Full report: losses, MAE, the fixed-probability baseline, per-act
// generated and ground-truth histograms with their distances, and the
// region cutoffs of all generated offsets.
nlohmann::json evaluation_report(const model::TrainedModel& m,
                                 std::span<const features::PairExample> pairs,
                                 const EvalOptions& options);

// Rows "act,source,bin_center_ms,count" for every histogram in a report.
std::string histograms_to_csv(const nlohmann::json& report);

}  // namespace rtnet::eval
