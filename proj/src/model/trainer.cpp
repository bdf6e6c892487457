#include "rtnet/model/trainer.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "rtnet/substrate/adam.hpp"
#include "rtnet/substrate/error.hpp"

namespace rtnet::model {

namespace {

constexpr const char* kModelFormat = "rtnet-model";

}  // namespace

CheckpointData to_checkpoint(const TrainedModel& m) {
  require(m.net != nullptr, "to_checkpoint: model has no network");
  CheckpointData data;
  data.meta = {{"format", kModelFormat},
               {"model", to_json(m.model_config)},
               {"train", to_json(m.train_config)},
               {"seed", m.train_config.seed},
               {"vocab", m.vocab.to_tsv()},
               {"act_names", m.act_names},
               {"silence_template", m.net->silence},
               {"provenance", m.provenance}};
  for (auto* p : m.net->parameters()) {
    data.tensors.push_back({p->name, p->value.shape(), p->value.values()});
  }
  return data;
}

TrainedModel from_checkpoint(const CheckpointData& data) {
  const auto& meta = data.meta;
  if (!meta.is_object() || meta.value("format", "") != kModelFormat) {
    throw FormatError("checkpoint does not hold an rtnet model");
  }
  TrainedModel m;
  try {
    m.model_config = model_config_from_json(meta.at("model"));
    m.train_config = train_config_from_json(meta.at("train"));
    m.vocab = features::VocabMap::from_tsv(meta.at("vocab").get<std::string>());
    m.act_names = meta.at("act_names").get<std::vector<std::string>>();
    m.provenance = meta.value("provenance", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
  m.net = std::make_unique<RtNetModel<float>>(m.model_config);
  m.net->silence = meta.at("silence_template").get<std::vector<float>>();
  if (m.net->silence.size() != m.model_config.acoustic_dim) {
    throw FormatError("checkpoint: silence template width does not match acoustic_dim");
  }
  for (auto* p : m.net->parameters()) {
    const auto& t = data.tensor(p->name);
    if (t.shape != p->value.shape()) throw FormatError("checkpoint: shape mismatch for " + p->name);
    p->value.values() = t.values;
  }
  return m;
}

void save_model(const std::string& path, const TrainedModel& m) { write_checkpoint(path, to_checkpoint(m)); }

TrainedModel load_model(const std::string& path) { return from_checkpoint(read_checkpoint(path)); }

StepLoss training_step_loss(RtNetModel<float>& model,
                            std::span<const features::PairExample* const> batch, RngStream& rng,
                            double w_kl, bool backward) {
  require(!batch.empty(), "training_step_loss: empty batch");
  StepLoss out;
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<float> eps(model.is_vae() ? model.config().latent_dim : 0);
  for (const auto* ex : batch) {
    if (ex->r_end < ex->r_start_bound) continue;
    const int r_start = static_cast<int>(rng.uniform_int(ex->r_start_bound, ex->r_end));
    for (auto& e : eps) e = static_cast<float>(rng.normal());
    const auto loss = model.pair_loss(*ex, r_start, eps, w_kl, backward, scale);
    out.bce += loss.bce;
    out.kl += loss.kl;
    out.total += loss.total;
    ++out.pairs;
  }
  require(out.pairs > 0, "training_step_loss: no pair in the batch has a span R");
  out.bce /= static_cast<double>(out.pairs);
  out.kl /= static_cast<double>(out.pairs);
  out.total /= static_cast<double>(out.pairs);
  return out;
}

TrainResult train_model(const features::Dataset& dataset, ModelConfig model_config,
                        const TrainConfig& train_config, const TrainProgress& progress) {
  train_config.validate();
  require(!dataset.train.empty(), "train: the training split is empty");
  model_config.acoustic_dim = dataset.acoustic_dim;
  model_config.vocab_size = dataset.vocab.size();
  model_config.validate();

  TrainResult result;
  auto& tm = result.model;
  tm.model_config = model_config;
  tm.train_config = train_config;
  tm.vocab = dataset.vocab;
  tm.act_names = dataset.act_names;
  tm.provenance = {{"train_pairs", dataset.train.size()},
                   {"test_pairs", dataset.test.size()},
                   {"excluded_empty_span", dataset.report.excluded_empty_span},
                   {"untagged_pairs", dataset.report.untagged}};
  tm.net = std::make_unique<RtNetModel<float>>(model_config);
  auto& net = *tm.net;
  net.init(train_config.seed);
  net.silence = dataset.silence_template;

  auto params = net.parameters();
  AdamConfig adam_cfg;
  adam_cfg.learning_rate = train_config.learning_rate;
  adam_cfg.l2 = train_config.l2;
  adam_cfg.schedule = train_config.schedule;
  Adam<float> adam(params, adam_cfg);

  RngStream order_rng(train_config.seed, 10);
  RngStream loss_rng(train_config.seed, 11);
  std::vector<std::size_t> order(dataset.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  std::vector<const features::PairExample*> batch;
  result.log.reserve(train_config.iterations);

  for (std::size_t it = 0; it < train_config.iterations; ++it) {
    batch.clear();
    while (batch.size() < train_config.batch_size) {
      if (cursor == order.size()) {
        for (std::size_t i = order.size(); i > 1; --i) {
          const auto j = static_cast<std::size_t>(order_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
          std::swap(order[i - 1], order[j]);
        }
        cursor = 0;
      }
      batch.push_back(&dataset.train[order[cursor++]]);
    }
    zero_grads(params);
    const auto loss = training_step_loss(net, batch, loss_rng, train_config.w_kl, true);
    TrainLogEntry entry{it, loss.bce, loss.kl, loss.total, adam.current_learning_rate()};
    adam.step();
    result.log.push_back(entry);
    if (progress) progress(entry);
  }
  return result;
}

std::string format_train_log(const std::vector<TrainLogEntry>& log) {
  std::ostringstream os;
  os << std::setprecision(9);
  os << "iteration\tbce\tkl\ttotal\tlearning_rate\n";
  for (const auto& e : log) {
    os << e.iteration << '\t' << e.bce << '\t' << e.kl << '\t' << e.total << '\t' << e.learning_rate << '\n';
  }
  return os.str();
}

}  // namespace rtnet::model
