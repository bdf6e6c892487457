#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtnet/features/dataset.hpp"
#include "rtnet/model/config.hpp"
#include "rtnet/model/rtnet.hpp"
#include "rtnet/substrate/checkpoint.hpp"
#include "rtnet/substrate/rng.hpp"

namespace rtnet::model {

// A model together with everything needed to apply it to new data.
struct TrainedModel {
  ModelConfig model_config;
  TrainConfig train_config;
  features::VocabMap vocab;
  std::vector<std::string> act_names;
  nlohmann::json provenance = nlohmann::json::object();  // corpus meta, dataset report
  std::unique_ptr<RtNetModel<float>> net;
};

CheckpointData to_checkpoint(const TrainedModel& m);
TrainedModel from_checkpoint(const CheckpointData& data);
void save_model(const std::string& path, const TrainedModel& m);
TrainedModel load_model(const std::string& path);

struct StepLoss {
  double bce = 0.0;
  double kl = 0.0;
  double total = 0.0;
  std::size_t pairs = 0;
};

// Mean over the batch of the per-pair losses with R_START drawn uniformly in
// each pair's span R and, for the VAE, eps ~ N(0, I). With `backward`, the
// parameter gradients of the batch mean are accumulated (not zeroed first).
StepLoss training_step_loss(RtNetModel<float>& model,
                            std::span<const features::PairExample* const> batch, RngStream& rng,
                            double w_kl, bool backward);

struct TrainLogEntry {
  std::size_t iteration = 0;
  double bce = 0.0;
  double kl = 0.0;
  double total = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  TrainedModel model;
  std::vector<TrainLogEntry> log;
};

using TrainProgress = std::function<void(const TrainLogEntry&)>;

// Initializes a model from `train_config.seed`, trains on `dataset.train`,
// and returns it with its per-iteration loss log.
TrainResult train_model(const features::Dataset& dataset, ModelConfig model_config,
                        const TrainConfig& train_config, const TrainProgress& progress = {});

std::string format_train_log(const std::vector<TrainLogEntry>& log);

}  // namespace rtnet::model
