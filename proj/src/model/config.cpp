#include "rtnet/model/config.hpp"

#include <sstream>

#include "rtnet/substrate/error.hpp"

namespace rtnet::model {

std::string to_string(Variant v) { return v == Variant::rtnet ? "rtnet" : "rtnet-vae"; }

std::string to_string(EncoderMode m) {
  switch (m) {
    case EncoderMode::full:
      return "full";
    case EncoderMode::acoustic_only:
      return "acoustic";
    case EncoderMode::linguistic_only:
      return "linguistic";
    case EncoderMode::none:
      break;
  }
  return "none";
}

std::string to_string(UserFeatures u) {
  switch (u) {
    case UserFeatures::both:
      return "both";
    case UserFeatures::acoustic:
      return "acoustic";
    case UserFeatures::linguistic:
      break;
  }
  return "linguistic";
}

std::string to_string(VaeHeads h) {
  switch (h) {
    case VaeHeads::relu:
      return "relu";
    case VaeHeads::sigma_relu:
      return "sigma-relu";
    case VaeHeads::linear:
      break;
  }
  return "linear";
}

Variant parse_variant(const std::string& s) {
  if (s == "rtnet") return Variant::rtnet;
  if (s == "rtnet-vae") return Variant::rtnet_vae;
  throw ContractError("variant: expected rtnet or rtnet-vae, got '" + s + "'");
}

EncoderMode parse_encoder_mode(const std::string& s) {
  if (s == "full") return EncoderMode::full;
  if (s == "acoustic") return EncoderMode::acoustic_only;
  if (s == "linguistic") return EncoderMode::linguistic_only;
  if (s == "none") return EncoderMode::none;
  throw ContractError("encoder: expected full, acoustic, linguistic or none, got '" + s + "'");
}

UserFeatures parse_user_features(const std::string& s) {
  if (s == "both") return UserFeatures::both;
  if (s == "acoustic") return UserFeatures::acoustic;
  if (s == "linguistic") return UserFeatures::linguistic;
  throw ContractError("user-features: expected both, acoustic or linguistic, got '" + s + "'");
}

VaeHeads parse_vae_heads(const std::string& s) {
  if (s == "linear") return VaeHeads::linear;
  if (s == "relu") return VaeHeads::relu;
  if (s == "sigma-relu") return VaeHeads::sigma_relu;
  throw ContractError("vae-heads: expected linear, relu or sigma-relu, got '" + s + "'");
}

void ModelConfig::validate() const {
  require(acoustic_dim > 0, "acoustic_dim must be positive");
  require(vocab_size > 4, "vocab_size must exceed the 4 special tokens");
  require(embedding_dim > 0, "embedding_dim must be positive");
  require(acoustic_hidden > 0, "acoustic_hidden must be positive");
  require(linguistic_hidden > 0, "linguistic_hidden must be positive");
  require(master_hidden > 0, "master_hidden must be positive");
  require(hz_dim > 0, "hz_dim must be positive");
  require(vae_reduce > 0, "vae_reduce must be positive");
  require(latent_dim > 0, "latent_dim must be positive");
  require(inference_hidden > 0, "inference_hidden must be positive");
}

void TrainConfig::validate() const {
  require(batch_size > 0, "batch_size must be positive");
  require(iterations > 0, "iterations must be positive");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(l2 >= 0.0, "l2 must be non-negative");
  require(w_kl >= 0.0, "w_kl must be non-negative");
  require(max_vocab > 4, "max_vocab must exceed the 4 special tokens");
  for (const auto& [it, factor] : schedule) {
    require(factor > 0.0, "schedule factors must be positive");
    (void)it;
  }
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"variant", to_string(c.variant)},
          {"encoder_mode", to_string(c.encoder_mode)},
          {"user_features", to_string(c.user_features)},
          {"acoustic_dim", c.acoustic_dim},
          {"vocab_size", c.vocab_size},
          {"embedding_dim", c.embedding_dim},
          {"acoustic_hidden", c.acoustic_hidden},
          {"linguistic_hidden", c.linguistic_hidden},
          {"master_hidden", c.master_hidden},
          {"hz_dim", c.hz_dim},
          {"vae_reduce", c.vae_reduce},
          {"latent_dim", c.latent_dim},
          {"vae_heads", to_string(c.vae_heads)},
          {"inference_hidden", c.inference_hidden}};
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},   {"iterations", c.iterations},
          {"learning_rate", c.learning_rate}, {"l2", c.l2},
          {"schedule", format_schedule(c.schedule)}, {"w_kl", c.w_kl},
          {"max_vocab", c.max_vocab},     {"test_every", c.test_every},
          {"seed", c.seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.variant = parse_variant(j.at("variant").get<std::string>());
  c.encoder_mode = parse_encoder_mode(j.at("encoder_mode").get<std::string>());
  c.user_features = parse_user_features(j.at("user_features").get<std::string>());
  c.acoustic_dim = j.at("acoustic_dim").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.acoustic_hidden = j.at("acoustic_hidden").get<std::size_t>();
  c.linguistic_hidden = j.at("linguistic_hidden").get<std::size_t>();
  c.master_hidden = j.at("master_hidden").get<std::size_t>();
  c.hz_dim = j.at("hz_dim").get<std::size_t>();
  c.vae_reduce = j.at("vae_reduce").get<std::size_t>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.vae_heads = parse_vae_heads(j.at("vae_heads").get<std::string>());
  c.inference_hidden = j.at("inference_hidden").get<std::size_t>();
  c.validate();
  return c;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.iterations = j.at("iterations").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.l2 = j.at("l2").get<double>();
  c.schedule = parse_schedule(j.at("schedule").get<std::string>());
  c.w_kl = j.at("w_kl").get<double>();
  c.max_vocab = j.at("max_vocab").get<std::size_t>();
  c.test_every = j.at("test_every").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

std::vector<std::pair<std::size_t, double>> parse_schedule(const std::string& text) {
  std::vector<std::pair<std::size_t, double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto colon = item.find(':');
    require(colon != std::string::npos, "schedule: expected iteration:factor, got '" + item + "'");
    try {
      const auto it = std::stoull(item.substr(0, colon));
      const double factor = std::stod(item.substr(colon + 1));
      require(factor > 0.0, "schedule: factor must be positive in '" + item + "'");
      out.emplace_back(static_cast<std::size_t>(it), factor);
    } catch (const std::logic_error&) {
      throw ContractError("schedule: cannot parse '" + item + "'");
    }
  }
  return out;
}

std::string format_schedule(const std::vector<std::pair<std::size_t, double>>& schedule) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (i > 0) os << ',';
    os << schedule[i].first << ':' << schedule[i].second;
  }
  return os.str();
}

}  // namespace rtnet::model
