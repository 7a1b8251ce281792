#pragma once

// Frozen-encoder metrics. All encodings here are clean (no channel noise).

#include "socsrl/agents.hpp"
#include "socsrl/environment.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace socsrl {

struct ProbeConfig {
  std::size_t epochs = 200;
  double lr = 0.1;
};

/// Multinomial logistic regression on latents. Prediction is the first
/// argmax of weights * z + bias.
struct ProbeModel {
  Eigen::MatrixXd weights;  // classes x latent dim
  Eigen::VectorXd bias;     // classes
  AgentId owner;

  std::size_t num_classes() const { return static_cast<std::size_t>(weights.rows()); }
};

/// Full-batch gradient descent on mean softmax cross-entropy from a zero
/// initialization; deterministic.
ProbeModel fit_probe(const Eigen::MatrixXd& latents, const std::vector<ClassId>& labels,
                     std::size_t num_classes, const ProbeConfig& config = {});

/// Fits a probe on enc(o) for the agent's frozen encoder.
ProbeModel train_probe(const Agent& agent, const LabeledDataset& train, const ProbeConfig& config = {});

std::vector<ClassId> predict(const ProbeModel& probe, const Eigen::MatrixXd& latents);
double accuracy(const std::vector<ClassId>& predicted, const std::vector<ClassId>& labels);
/// Mean cross-entropy (natural log) of the probe on the given latents.
double cross_entropy(const ProbeModel& probe, const Eigen::MatrixXd& latents,
                     const std::vector<ClassId>& labels);

double probe_accuracy(const ProbeModel& probe, const Agent& agent, const LabeledDataset& eval);
double probe_loss(const ProbeModel& probe, const Agent& agent, const LabeledDataset& eval);

struct SwapMatrix {
  Eigen::MatrixXd accuracy;  // (i, j): probe of agent i on latents of agent j
  double mean_off_diagonal = 0.0;
};

/// probes[k] belongs to agents[k].
SwapMatrix swap_accuracy(const std::vector<ProbeModel>& probes, const std::vector<Agent>& agents,
                         const LabeledDataset& eval);

/// Fraction of (i, j != i, d) with f_i(enc_j(d)) == f_j(enc_i(d)).
double agreement(const std::vector<ProbeModel>& probes, const std::vector<Agent>& agents,
                 const Eigen::MatrixXd& observations);
double agreement(const std::vector<ProbeModel>& probes, const std::vector<Agent>& agents,
                 const LabeledDataset& data);

/// Mean squared reconstruction error of dec(enc(o)) over the dataset.
double reconstruction_error(const Agent& agent, const LabeledDataset& data);

/// Subset sizes 10^x_n, x_n = 1 + n (log10 |V| - 1) / (K - 1), rounded and
/// deduplicated (strictly increasing, first 10, last |V|).
std::vector<std::size_t> data_efficiency_sizes(std::size_t v_size, std::size_t k);

struct DataEffConfig {
  std::size_t k = 10;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  ProbeConfig probe;
};

struct DataEffPoint {
  std::size_t size = 0;
  std::size_t train_count = 0;
  std::size_t eval_count = 0;
  double loss = 0.0;      // mean over agents
  double accuracy = 0.0;  // mean over agents
};

/// For each size: a uniform subset of V, split train:eval, per-agent probes
/// fit on the train part and scored on the eval part.
std::vector<DataEffPoint> data_efficiency_curve(const std::vector<Agent>& agents,
                                                const LabeledDataset& validation,
                                                const DataEffConfig& config = {});

/// Probes fit on `train`, every metric scored on `eval`.
struct PopulationMetrics {
  std::vector<ProbeModel> probes;
  std::vector<double> probe_accuracy;
  double mean_accuracy = 0.0;
  SwapMatrix swap;              // empty for a single agent
  double agreement = 0.0;       // 0 for a single agent
  double reconstruction = 0.0;  // mean over agents
};

PopulationMetrics evaluate_population(const std::vector<Agent>& agents, const LabeledDataset& train,
                                      const LabeledDataset& eval, const ProbeConfig& config = {});

}  // namespace socsrl
