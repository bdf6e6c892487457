#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace rtnet::model {

enum class Variant { rtnet, rtnet_vae };
// Which parts of the response the encoder sees.
enum class EncoderMode { full, acoustic_only, linguistic_only, none };
// Which parts of the user's frame features reach the inference network.
enum class UserFeatures { both, acoustic, linguistic };
// Activation on the VAE heads: both linear, both relu, or linear mu with relu sigma_hat.
enum class VaeHeads { linear, relu, sigma_relu };

std::string to_string(Variant v);
std::string to_string(EncoderMode m);
std::string to_string(UserFeatures u);
std::string to_string(VaeHeads h);
Variant parse_variant(const std::string& s);
EncoderMode parse_encoder_mode(const std::string& s);
UserFeatures parse_user_features(const std::string& s);
VaeHeads parse_vae_heads(const std::string& s);

struct ModelConfig {
  Variant variant = Variant::rtnet;
  EncoderMode encoder_mode = EncoderMode::full;
  UserFeatures user_features = UserFeatures::both;
  std::size_t acoustic_dim = 4;  // set from the corpus
  std::size_t vocab_size = 8;    // embedding rows, set from the vocabulary
  std::size_t embedding_dim = 16;
  std::size_t acoustic_hidden = 32;
  std::size_t linguistic_hidden = 32;
  std::size_t master_hidden = 64;
  std::size_t hz_dim = 64;
  std::size_t vae_reduce = 32;
  std::size_t latent_dim = 4;
  VaeHeads vae_heads = VaeHeads::sigma_relu;
  std::size_t inference_hidden = 64;

  // Throws ContractError naming the offending field.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t iterations = 2000;
  double learning_rate = 5e-4;
  double l2 = 1e-5;
  std::vector<std::pair<std::size_t, double>> schedule;
  double w_kl = 0.0;
  std::size_t max_vocab = 256;
  std::size_t test_every = 5;  // every 5th conversation is held out
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const TrainConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);

// "iteration:factor,iteration:factor"
std::vector<std::pair<std::size_t, double>> parse_schedule(const std::string& text);
std::string format_schedule(const std::vector<std::pair<std::size_t, double>>& schedule);

}  // namespace rtnet::model
