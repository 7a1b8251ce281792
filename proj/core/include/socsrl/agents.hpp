#pragma once

#include "socsrl/netcore.hpp"
#include "socsrl/rng.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace socsrl {

struct AgentId {
  std::size_t index = 0;

  friend bool operator==(const AgentId&, const AgentId&) = default;
  friend auto operator<=>(const AgentId&, const AgentId&) = default;
};

/// Architecture shared by every agent of a population.
struct AgentLayout {
  Layout encoder;
  Layout decoder;

  std::size_t observation_dim() const { return encoder.front().in_dim; }
  std::size_t latent_dim() const { return encoder.back().out_dim; }

  friend bool operator==(const AgentLayout&, const AgentLayout&) = default;
};

/// observation -> hidden (relu) -> latent (identity), mirrored decoder with a
/// sigmoid output.
AgentLayout default_agent_layout(std::size_t observation_dim, std::size_t hidden_dim = 256,
                                 std::size_t latent_dim = 32);

/// Throws ShapeError unless the encoder and decoder fit together.
void validate_agent_layout(const AgentLayout& layout);

struct Agent {
  AgentId id;
  Network encoder;
  Network decoder;
  AdamState encoder_opt;
  AdamState decoder_opt;

  std::size_t observation_dim() const { return encoder.input_dim(); }
  std::size_t latent_dim() const { return encoder.output_dim(); }
  AgentLayout layout() const { return {encoder.layout(), decoder.layout()}; }
};

Agent make_agent(AgentId id, const AgentLayout& layout, std::uint64_t seed);

/// Channel noise. `seed` roots the lineage from which every emission draws a
/// fresh stream.
struct ChannelConfig {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// A batch of messages: one latent per column.
struct Message {
  Eigen::MatrixXd clean;
  Eigen::MatrixXd noisy;
  AgentId sender;
};

struct Encoding {
  Message message;
  GradientTape tape;
};

struct Decoding {
  Eigen::MatrixXd reconstruction;
  GradientTape tape;
};

/// Adds iid N(0, sigma^2) noise in column-major order (sample by sample).
void add_channel_noise(Eigen::MatrixXd& latents, double sigma, Rng& rng);

/// noisy = clean + N(0, sigma^2) drawn independently per component from `rng`.
/// With sigma == 0 no draws are made and noisy == clean.
Encoding encode(const Agent& agent, const Eigen::MatrixXd& observations,
                const ChannelConfig& channel, Rng& rng);

Decoding decode(const Agent& agent, const Eigen::MatrixXd& latents);

/// Clean latents only (evaluation path).
Eigen::MatrixXd embed(const Agent& agent, const Eigen::MatrixXd& observations);

/// n agents with independently derived initial parameters.
std::vector<Agent> spawn_population(std::size_t n, const AgentLayout& layout, std::uint64_t seed);

/// Applies one Adam step to the encoder and decoder of `agent`.
void apply_gradients(Agent& agent, const ParamVector& encoder_grad,
                     const ParamVector& decoder_grad, const AdamConfig& config);

}  // namespace socsrl
