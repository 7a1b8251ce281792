#pragma once

#include "socsrl/agents.hpp"
#include "socsrl/environment.hpp"
#include "socsrl/losses.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace socsrl {

/// Where the observations of a run come from. Serialized into the run config.
struct DatasetSpec {
  std::string kind = "synthetic";  // "synthetic" | "idx"

  // synthetic
  std::size_t num_classes = 10;
  std::size_t samples_per_class = 600;
  std::size_t obs_dim = 64;
  double view_noise = 0.45;
  std::size_t view_rank = 16;
  double mask_fraction = 0.1;
  double mask_noise = 0.05;
  std::uint64_t seed = 0;
  double validation_fraction = 1.0 / 6.0;

  // idx: train files are the training set, test files the validation set V
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

DatasetSplit load_dataset(const DatasetSpec& spec);

struct TrainConfig {
  std::size_t population_size = 3;
  std::int64_t rounds = 5000;
  std::size_t batch_size = 128;
  LossWeights weights;
  double sigma = 0.0;
  DatasetSpec dataset;
  SampleMode mode = SampleMode::perspectives;
  SelfPath self_path = SelfPath::noisy;
  std::uint64_t seed = 0;
  AdamConfig adam;
  std::size_t hidden_dim = 256;
  std::size_t latent_dim = 32;
  std::int64_t checkpoint_every = 0;  // 0: final checkpoint only

  /// Throws ConfigError on any violated precondition.
  void validate() const;
  AgentLayout agent_layout(std::size_t observation_dim) const;
};

inline constexpr std::string_view kTrainConfigSchema = "socsrl.train_config/1";

nlohmann::json to_json(const TrainConfig& config);
nlohmann::json to_json(const DatasetSpec& spec);
/// Strict: unknown keys and wrong types raise ConfigError. Missing keys keep defaults.
TrainConfig train_config_from_json(const nlohmann::json& j);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);

/// 16 hex digits over the canonical JSON of the config.
std::string config_hash(const TrainConfig& config);

struct RunRecord {
  TrainConfig config;
  std::string config_hash;
  std::vector<LossBreakdown> stream;           // treatment population, one per round
  std::vector<LossBreakdown> baseline_stream;  // co-trained autoencoders (l_ae only)
  std::vector<Agent> agents;
  std::vector<Agent> baseline;
  double wall_seconds = 0.0;
};

struct TrainHooks {
  std::function<void(std::int64_t round, const LossBreakdown& treatment,
                     const LossBreakdown& baseline)>
      on_round;
  std::function<void(std::int64_t round, const std::vector<Agent>& treatment,
                     const std::vector<Agent>& baseline)>
      on_checkpoint;
};

/// Ordered pair (i, j), i != j, uniform over all ordered pairs.
std::pair<std::size_t, std::size_t> sample_pair(std::size_t population_size, Rng& rng);

/// Runs the seeded training loop on an already loaded dataset. Throws
/// NumericError carrying the round index when a loss diverges.
RunRecord train(const TrainConfig& config, const DatasetSplit& data, const TrainHooks& hooks = {});

/// Loads config.dataset and trains.
RunRecord train(const TrainConfig& config, const TrainHooks& hooks = {});

/// Weights for one point of the AE <-> DTI interpolation: eta_ae = alpha,
/// eta_dti = 1 - alpha.
LossWeights interpolation_weights(double alpha);

}  // namespace socsrl
