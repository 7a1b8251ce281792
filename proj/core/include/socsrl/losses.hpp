#pragma once

#include "socsrl/agents.hpp"
#include "socsrl/sample_mode.hpp"

#include <Eigen/Core>

namespace socsrl {

struct LossWeights {
  double eta_ae = 1.0;
  double eta_mtm = 0.0;
  double eta_dti = 0.0;
  double eta_dtd = 0.0;

  /// Throws ConfigError unless all weights are >= 0 and at least one is > 0.
  void validate() const;
  /// True when any cross-agent loss is active.
  bool uses_communication() const { return eta_mtm > 0 || eta_dti > 0 || eta_dtd > 0; }

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct LossBreakdown {
  double l_ae = 0.0;
  double l_mtm = 0.0;
  double l_dti = 0.0;
  double l_dtd = 0.0;
  double total = 0.0;

  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

/// Mean over all entries of the squared difference. For batches this is the
/// mean over samples of the per-sample mean over components.
double mse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Weighted sum of the four components; ignores `components.total`.
double combine(const LossBreakdown& components, const LossWeights& weights);

struct AgentGradients {
  ParamVector encoder;
  ParamVector decoder;
};

/// What a receiver decodes for its own reconstruction o_ii: the message it
/// emitted (noisy) or the encoder output before the channel (clean).
enum class SelfPath { noisy, clean };

std::string_view to_string(SelfPath path);
SelfPath self_path_from_string(std::string_view name);

struct RoundOptions {
  SampleMode mode = SampleMode::perspectives;
  SelfPath self_path = SelfPath::noisy;
  /// When false, nothing a receiver computes is backpropagated into the
  /// sender's encoder. Only tests turn this off.
  bool route_channel_gradients = true;
};

struct RoundResult {
  LossBreakdown losses;
  AgentGradients grad_i;
  AgentGradients grad_j;
};

/// One communication round between agents i and j on observation batches
/// o_i and o_j (one column per sample). Every directed term is evaluated for
/// (i <- j) and (j <- i) and averaged. Messages carry channel noise drawn once
/// per emission from a stream derived from (channel.seed, sender, slot); the
/// self reconstruction decodes the noisy or clean own latent per `self_path`.
/// Components whose weight is zero are reported as 0.
RoundResult round_losses(const Agent& agent_i, const Agent& agent_j, const Eigen::MatrixXd& o_i,
                         const Eigen::MatrixXd& o_j, const ChannelConfig& channel,
                         const LossWeights& weights, const RoundOptions& options = {});

struct AutoencoderResult {
  double l_ae = 0.0;
  AgentGradients grad;
};

/// Plain autoencoding loss of a single agent, gradient scaled by `scale`.
/// Touches no other agent; used for the baseline population.
AutoencoderResult autoencoder_loss(const Agent& agent, const Eigen::MatrixXd& observations,
                                   double scale = 1.0);

}  // namespace socsrl
