#include "socsrl/agents.hpp"

#include "socsrl/errors.hpp"

#include <random>

namespace socsrl {

AgentLayout default_agent_layout(std::size_t observation_dim, std::size_t hidden_dim,
                                 std::size_t latent_dim) {
  AgentLayout l;
  l.encoder = make_layout({observation_dim, hidden_dim, latent_dim},
                          {Activation::relu, Activation::identity});
  l.decoder = make_layout({latent_dim, hidden_dim, observation_dim},
                          {Activation::relu, Activation::sigmoid});
  return l;
}

void validate_agent_layout(const AgentLayout& layout) {
  validate_layout(layout.encoder);
  validate_layout(layout.decoder);
  if (layout.encoder.back().out_dim != layout.decoder.front().in_dim)
    throw ShapeError("encoder output dim must equal decoder input dim (latent dim)");
  if (layout.encoder.front().in_dim != layout.decoder.back().out_dim)
    throw ShapeError("encoder input dim must equal decoder output dim (observation dim)");
}

Agent make_agent(AgentId id, const AgentLayout& layout, std::uint64_t seed) {
  validate_agent_layout(layout);
  Agent a;
  a.id = id;
  a.encoder = to_network(init_params(layout.encoder, derive_seed(seed, "encoder")));
  a.decoder = to_network(init_params(layout.decoder, derive_seed(seed, "decoder")));
  a.encoder_opt = make_adam_state(parameter_count(layout.encoder));
  a.decoder_opt = make_adam_state(parameter_count(layout.decoder));
  return a;
}

void add_channel_noise(Eigen::MatrixXd& latents, double sigma, Rng& rng) {
  if (sigma < 0.0) throw ConfigError("channel sigma must be >= 0");
  if (sigma == 0.0) return;
  std::normal_distribution<double> noise(0.0, sigma);
  for (Eigen::Index c = 0; c < latents.cols(); ++c)
    for (Eigen::Index r = 0; r < latents.rows(); ++r) latents(r, c) += noise(rng);
}

Encoding encode(const Agent& agent, const Eigen::MatrixXd& observations,
                const ChannelConfig& channel, Rng& rng) {
  auto fwd = forward(agent.encoder, observations);
  Encoding e;
  e.message.sender = agent.id;
  e.message.noisy = fwd.output;
  add_channel_noise(e.message.noisy, channel.sigma, rng);
  e.message.clean = std::move(fwd.output);
  e.tape = std::move(fwd.tape);
  return e;
}

Decoding decode(const Agent& agent, const Eigen::MatrixXd& latents) {
  if (static_cast<std::size_t>(latents.rows()) != agent.latent_dim())
    throw ShapeError("latent dim " + std::to_string(latents.rows()) + " != agent latent dim " +
                     std::to_string(agent.latent_dim()));
  auto fwd = forward(agent.decoder, latents);
  return {std::move(fwd.output), std::move(fwd.tape)};
}

Eigen::MatrixXd embed(const Agent& agent, const Eigen::MatrixXd& observations) {
  return evaluate(agent.encoder, observations);
}

std::vector<Agent> spawn_population(std::size_t n, const AgentLayout& layout, std::uint64_t seed) {
  if (n == 0) throw ConfigError("population size must be at least 1");
  std::vector<Agent> agents;
  agents.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    agents.push_back(make_agent(AgentId{i}, layout, derive_seed(seed, "agent", {i})));
  return agents;
}

void apply_gradients(Agent& agent, const ParamVector& encoder_grad,
                     const ParamVector& decoder_grad, const AdamConfig& config) {
  auto enc = to_params(agent.encoder);
  auto dec = to_params(agent.decoder);
  adam_step(enc, encoder_grad, agent.encoder_opt, config);
  adam_step(dec, decoder_grad, agent.decoder_opt, config);
  assign_params(agent.encoder, enc);
  assign_params(agent.decoder, dec);
}

}  // namespace socsrl
