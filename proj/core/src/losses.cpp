#include "socsrl/losses.hpp"

#include "socsrl/errors.hpp"

#include <array>
#include <cmath>

namespace socsrl {

std::string_view to_string(SampleMode mode) {
  return mode == SampleMode::perspectives ? "perspectives" : "shared_input";
}

SampleMode sample_mode_from_string(std::string_view name) {
  if (name == "perspectives") return SampleMode::perspectives;
  if (name == "shared_input") return SampleMode::shared_input;
  throw ConfigError("unknown sample mode '" + std::string(name) +
                    "' (expected perspectives or shared_input)");
}

std::string_view to_string(SelfPath path) { return path == SelfPath::noisy ? "noisy" : "clean"; }

SelfPath self_path_from_string(std::string_view name) {
  if (name == "noisy") return SelfPath::noisy;
  if (name == "clean") return SelfPath::clean;
  throw ConfigError("unknown self path '" + std::string(name) + "' (expected noisy or clean)");
}

void LossWeights::validate() const {
  for (double w : {eta_ae, eta_mtm, eta_dti, eta_dtd})
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("loss weights must be finite and >= 0");
  if (eta_ae + eta_mtm + eta_dti + eta_dtd <= 0.0)
    throw ConfigError("at least one loss weight must be > 0");
}

double mse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("mse: operands have different shapes");
  if (a.size() == 0) throw ShapeError("mse: empty operands");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double combine(const LossBreakdown& c, const LossWeights& w) {
  return w.eta_ae * c.l_ae + w.eta_mtm * c.l_mtm + w.eta_dti * c.l_dti + w.eta_dtd * c.l_dtd;
}

namespace {

// Emission slots: an agent's message about its own view, and (shared-input
// mode only) its message about the partner's view.
constexpr std::uint64_t kOwnSlot = 0;
constexpr std::uint64_t kPartnerSlot = 1;

void check_finite(const LossBreakdown& l) {
  for (double v : {l.l_ae, l.l_mtm, l.l_dti, l.l_dtd, l.total})
    if (!std::isfinite(v)) throw NumericError("non-finite loss in communication round");
}

}  // namespace

RoundResult round_losses(const Agent& agent_i, const Agent& agent_j, const Eigen::MatrixXd& o_i,
                         const Eigen::MatrixXd& o_j, const ChannelConfig& channel,
                         const LossWeights& weights, const RoundOptions& options) {
  if (&agent_i == &agent_j || agent_i.id == agent_j.id)
    throw UsageError("round_losses needs two distinct agents");
  if (agent_i.layout() != agent_j.layout())
    throw ShapeError("agents in one round must share a layout");
  if (o_i.rows() != o_j.rows() || o_i.cols() != o_j.cols())
    throw ShapeError("observation batches of both agents must have the same shape");
  if (o_i.cols() == 0) throw ShapeError("empty observation batch");
  weights.validate();

  const std::array<const Agent*, 2> agent{&agent_i, &agent_j};
  const std::array<const Eigen::MatrixXd*, 2> obs{&o_i, &o_j};
  const bool shared = options.mode == SampleMode::shared_input;
  const Eigen::Index batch = o_i.cols();

  // Encoders. In shared-input mode each agent also encodes its partner's view,
  // which is what it sends to that partner. Separate passes keep the own-view
  // arithmetic identical across modes.
  std::array<ForwardResult, 2> enc_own, enc_partner;
  std::array<Eigen::MatrixXd, 2> own_clean, own_msg, sent_msg;
  for (int a = 0; a < 2; ++a) {
    enc_own[a] = forward(agent[a]->encoder, *obs[a]);
    own_clean[a] = enc_own[a].output;
    own_msg[a] = own_clean[a];
    Rng own_rng = make_rng(channel.seed, "emission", {agent[a]->id.index, kOwnSlot});
    add_channel_noise(own_msg[a], channel.sigma, own_rng);
    if (shared) {
      enc_partner[a] = forward(agent[a]->encoder, *obs[1 - a]);
      sent_msg[a] = enc_partner[a].output;
      Rng partner_rng = make_rng(channel.seed, "emission", {agent[a]->id.index, kPartnerSlot});
      add_channel_noise(sent_msg[a], channel.sigma, partner_rng);
    } else {
      sent_msg[a] = own_msg[a];
    }
  }

  // Decoders: receiver r decodes its own latent and the message received from
  // s in two passes of equal shape, so equal inputs give bitwise-equal outputs.
  const auto& self_input = options.self_path == SelfPath::noisy ? own_msg : own_clean;
  std::array<ForwardResult, 2> dec_self, dec_cross;
  std::array<double, 2> ae{}, mtm{}, dti{}, dtd{};
  for (int r = 0; r < 2; ++r) {
    const int s = 1 - r;
    dec_self[r] = forward(agent[r]->decoder, self_input[r]);
    dec_cross[r] = forward(agent[r]->decoder, sent_msg[s]);
    const auto& o_self = dec_self[r].output;
    const auto& o_cross = dec_cross[r].output;
    ae[r] = mse(*obs[r], o_self);
    mtm[r] = mse(own_msg[r], sent_msg[s]);
    dti[r] = mse(o_cross, *obs[r]);
    dtd[r] = mse(o_self, o_cross);
  }

  // Terms with zero weight are reported as 0: they take no part in the
  // objective, and an AE-only round must not depend on the sampling mode.
  RoundResult result;
  auto& L = result.losses;
  L.l_ae = weights.eta_ae > 0.0 ? 0.5 * (ae[0] + ae[1]) : 0.0;
  L.l_mtm = weights.eta_mtm > 0.0 ? 0.5 * (mtm[0] + mtm[1]) : 0.0;
  L.l_dti = weights.eta_dti > 0.0 ? 0.5 * (dti[0] + dti[1]) : 0.0;
  L.l_dtd = weights.eta_dtd > 0.0 ? 0.5 * (dtd[0] + dtd[1]) : 0.0;
  L.total = combine(L, weights);
  check_finite(L);

  const double obs_elems = static_cast<double>(o_i.size());
  const double lat_elems = static_cast<double>(own_clean[0].size());
  // d(0.5 * eta * MSE)/dx = eta * (x - y) / n
  const double k_ae = weights.eta_ae / obs_elems;
  const double k_dti = weights.eta_dti / obs_elems;
  const double k_dtd = weights.eta_dtd / obs_elems;
  const double k_mtm = weights.eta_mtm / lat_elems;

  // Gradients w.r.t. each encoder's outputs on its own and its partner's view.
  std::array<Eigen::MatrixXd, 2> own_grad, partner_grad;
  for (int a = 0; a < 2; ++a) {
    own_grad[a] = Eigen::MatrixXd::Zero(own_clean[a].rows(), batch);
    if (shared) partner_grad[a] = Eigen::MatrixXd::Zero(own_clean[a].rows(), batch);
  }

  std::array<ParamVector, 2> dec_param_grad;
  for (int r = 0; r < 2; ++r) {
    const int s = 1 - r;
    const auto& o_self = dec_self[r].output;
    const auto& o_cross = dec_cross[r].output;
    const Eigen::MatrixXd g_self = k_ae * (o_self - *obs[r]) + k_dtd * (o_self - o_cross);
    const Eigen::MatrixXd g_cross = k_dti * (o_cross - *obs[r]) + k_dtd * (o_cross - o_self);
    auto back_self = backward(agent[r]->decoder, dec_self[r].tape, g_self);
    auto back_cross = backward(agent[r]->decoder, dec_cross[r].tape, g_cross);
    dec_param_grad[r] = std::move(back_self.param_grad);
    for (std::size_t k = 0; k < dec_param_grad[r].values.size(); ++k)
      dec_param_grad[r].values[k] += back_cross.param_grad.values[k];

    const Eigen::MatrixXd mtm_grad = k_mtm * (own_msg[r] - sent_msg[s]);
    // Receiver side: own latent (self decoding) and own noisy message.
    own_grad[r] += back_self.input_grad + mtm_grad;
    // Sender side: everything that touched the received message crosses the channel.
    if (options.route_channel_gradients) {
      auto& sender = shared ? partner_grad[s] : own_grad[s];
      sender += back_cross.input_grad - mtm_grad;
    }
  }

  std::array<ParamVector, 2> enc_param_grad;
  for (int a = 0; a < 2; ++a) {
    enc_param_grad[a] = backward(agent[a]->encoder, enc_own[a].tape, own_grad[a], false).param_grad;
    if (shared) {
      const auto extra = backward(agent[a]->encoder, enc_partner[a].tape, partner_grad[a], false);
      for (std::size_t k = 0; k < extra.param_grad.values.size(); ++k)
        enc_param_grad[a].values[k] += extra.param_grad.values[k];
    }
  }

  result.grad_i = {std::move(enc_param_grad[0]), std::move(dec_param_grad[0])};
  result.grad_j = {std::move(enc_param_grad[1]), std::move(dec_param_grad[1])};
  return result;
}

AutoencoderResult autoencoder_loss(const Agent& agent, const Eigen::MatrixXd& observations,
                                   double scale) {
  auto enc = forward(agent.encoder, observations);
  auto dec = forward(agent.decoder, enc.output);
  AutoencoderResult r;
  r.l_ae = mse(observations, dec.output);
  if (!std::isfinite(r.l_ae)) throw NumericError("non-finite autoencoder loss");
  const Eigen::MatrixXd g = (2.0 * scale / static_cast<double>(observations.size())) *
                            (dec.output - observations);
  auto dback = backward(agent.decoder, dec.tape, g);
  auto eback = backward(agent.encoder, enc.tape, dback.input_grad, false);
  r.grad = {std::move(eback.param_grad), std::move(dback.param_grad)};
  return r;
}

}  // namespace socsrl
