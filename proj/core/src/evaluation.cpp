#include "socsrl/evaluation.hpp"

#include "socsrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace socsrl {

namespace {

// Column-wise log-softmax.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    const double lse = m + std::log((logits.col(c).array() - m).exp().sum());
    out.col(c) = logits.col(c).array() - lse;
  }
  return out;
}

Eigen::MatrixXd logits_of(const ProbeModel& p, const Eigen::MatrixXd& latents) {
  if (latents.rows() != p.weights.cols()) throw ShapeError("probe and latent dims differ");
  return (p.weights * latents).colwise() + p.bias;
}

void require_population(const std::vector<ProbeModel>& probes, const std::vector<Agent>& agents) {
  if (agents.size() < 2) throw UsageError("cross-agent metrics need at least two agents");
  if (probes.size() != agents.size()) throw ShapeError("need exactly one probe per agent");
}

}  // namespace

ProbeModel fit_probe(const Eigen::MatrixXd& latents, const std::vector<ClassId>& labels,
                     std::size_t num_classes, const ProbeConfig& config) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (n == 0) throw ShapeError("probe training set is empty");
  if (latents.cols() != n) throw ShapeError("one label per latent column required");
  if (num_classes == 0) throw ShapeError("probe needs at least one class");
  for (ClassId y : labels)
    if (y >= num_classes) throw ShapeError("probe label out of range");

  const auto classes = static_cast<Eigen::Index>(num_classes);
  ProbeModel p;
  p.weights = Eigen::MatrixXd::Zero(classes, latents.rows());
  p.bias = Eigen::VectorXd::Zero(classes);
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(classes, n);
  for (Eigen::Index i = 0; i < n; ++i) onehot(labels[static_cast<std::size_t>(i)], i) = 1.0;

  const double step = config.lr / static_cast<double>(n);
  for (std::size_t e = 0; e < config.epochs; ++e) {
    const Eigen::MatrixXd g = log_softmax(logits_of(p, latents)).array().exp().matrix() - onehot;
    p.weights.noalias() -= step * g * latents.transpose();
    p.bias -= step * g.rowwise().sum();
  }
  return p;
}

ProbeModel train_probe(const Agent& agent, const LabeledDataset& train, const ProbeConfig& config) {
  auto p = fit_probe(embed(agent, train.observations()), train.labels(), train.num_classes(), config);
  p.owner = agent.id;
  return p;
}

std::vector<ClassId> predict(const ProbeModel& probe, const Eigen::MatrixXd& latents) {
  const Eigen::MatrixXd logits = logits_of(probe, latents);
  std::vector<ClassId> out(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    Eigen::Index best = 0;
    logits.col(c).maxCoeff(&best);
    out[static_cast<std::size_t>(c)] = static_cast<ClassId>(best);
  }
  return out;
}

double accuracy(const std::vector<ClassId>& predicted, const std::vector<ClassId>& labels) {
  if (predicted.size() != labels.size()) throw ShapeError("prediction and label counts differ");
  if (labels.empty()) throw ShapeError("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double cross_entropy(const ProbeModel& probe, const Eigen::MatrixXd& latents,
                     const std::vector<ClassId>& labels) {
  if (labels.empty()) throw ShapeError("cross-entropy of an empty set");
  if (static_cast<std::size_t>(latents.cols()) != labels.size())
    throw ShapeError("one label per latent column required");
  const Eigen::MatrixXd lp = log_softmax(logits_of(probe, latents));
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= probe.num_classes()) throw ShapeError("label out of probe range");
    sum -= lp(labels[i], static_cast<Eigen::Index>(i));
  }
  return sum / static_cast<double>(labels.size());
}

double probe_accuracy(const ProbeModel& probe, const Agent& agent, const LabeledDataset& eval) {
  return accuracy(predict(probe, embed(agent, eval.observations())), eval.labels());
}

double probe_loss(const ProbeModel& probe, const Agent& agent, const LabeledDataset& eval) {
  return cross_entropy(probe, embed(agent, eval.observations()), eval.labels());
}

SwapMatrix swap_accuracy(const std::vector<ProbeModel>& probes, const std::vector<Agent>& agents,
                         const LabeledDataset& eval) {
  require_population(probes, agents);
  const auto n = static_cast<Eigen::Index>(agents.size());
  SwapMatrix s;
  s.accuracy = Eigen::MatrixXd::Zero(n, n);
  double off = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::MatrixXd z = embed(agents[static_cast<std::size_t>(j)], eval.observations());
    for (Eigen::Index i = 0; i < n; ++i) {
      s.accuracy(i, j) = accuracy(predict(probes[static_cast<std::size_t>(i)], z), eval.labels());
      if (i != j) off += s.accuracy(i, j);
    }
  }
  s.mean_off_diagonal = off / static_cast<double>(n * n - n);
  return s;
}

double agreement(const std::vector<ProbeModel>& probes, const std::vector<Agent>& agents,
                 const Eigen::MatrixXd& observations) {
  require_population(probes, agents);
  const std::size_t n = agents.size();
  const auto d = static_cast<std::size_t>(observations.cols());
  if (d == 0) throw ShapeError("agreement over an empty dataset");
  // pred[i][j][d] = f_i(enc_j(d))
  std::vector<std::vector<std::vector<ClassId>>> pred(n, std::vector<std::vector<ClassId>>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const Eigen::MatrixXd z = embed(agents[j], observations);
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) pred[i][j] = predict(probes[i], z);
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j)
        for (std::size_t k = 0; k < d; ++k) hits += pred[i][j][k] == pred[j][i][k];
  return static_cast<double>(hits) / static_cast<double>((n * n - n) * d);
}

double agreement(const std::vector<ProbeModel>& probes, const std::vector<Agent>& agents,
                 const LabeledDataset& data) {
  return agreement(probes, agents, data.observations());
}

double reconstruction_error(const Agent& agent, const LabeledDataset& data) {
  const Eigen::MatrixXd& o = data.observations();
  if (o.size() == 0) throw ShapeError("reconstruction error of an empty dataset");
  return (evaluate(agent.decoder, evaluate(agent.encoder, o)) - o).squaredNorm() /
         static_cast<double>(o.size());
}

std::vector<std::size_t> data_efficiency_sizes(std::size_t v_size, std::size_t k) {
  if (v_size < 10) throw ConfigError("data efficiency needs |V| >= 10");
  if (k < 2) throw ConfigError("data efficiency needs K >= 2 subsets");
  const double top = std::log10(static_cast<double>(v_size));
  std::vector<std::size_t> sizes;
  for (std::size_t n = 0; n < k; ++n) {
    const double x = 1.0 + static_cast<double>(n) * (top - 1.0) / static_cast<double>(k - 1);
    auto s = static_cast<std::size_t>(std::llround(std::pow(10.0, x)));
    if (n == 0) s = 10;
    if (n + 1 == k) s = v_size;
    s = std::clamp<std::size_t>(s, 10, v_size);
    if (sizes.empty() || s > sizes.back()) sizes.push_back(s);
  }
  return sizes;
}

std::vector<DataEffPoint> data_efficiency_curve(const std::vector<Agent>& agents,
                                                const LabeledDataset& validation,
                                                const DataEffConfig& config) {
  if (agents.empty()) throw UsageError("data efficiency needs at least one agent");
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0))
    throw ConfigError("train_fraction must be in (0, 1)");
  const auto sizes = data_efficiency_sizes(validation.size(), config.k);

  std::vector<Eigen::MatrixXd> latents;
  for (const auto& a : agents) latents.push_back(embed(a, validation.observations()));

  std::vector<DataEffPoint> curve;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    DataEffPoint pt;
    pt.size = sizes[s];
    pt.train_count = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(pt.size))), 1,
        pt.size - 1);
    pt.eval_count = pt.size - pt.train_count;

    std::vector<std::size_t> idx(validation.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng = make_rng(config.seed, "data_efficiency", {static_cast<std::uint64_t>(s)});
    for (std::size_t k = 0; k < pt.size; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, idx.size() - 1);
      std::swap(idx[k], idx[pick(rng)]);
    }
    const std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(pt.train_count));
    const std::vector<std::size_t> eval_idx(idx.begin() + static_cast<std::ptrdiff_t>(pt.train_count),
                                            idx.begin() + static_cast<std::ptrdiff_t>(pt.size));
    const auto y_train = validation.gather_labels(train_idx);
    const auto y_eval = validation.gather_labels(eval_idx);

    for (const auto& z : latents) {
      Eigen::MatrixXd z_train(z.rows(), static_cast<Eigen::Index>(train_idx.size()));
      Eigen::MatrixXd z_eval(z.rows(), static_cast<Eigen::Index>(eval_idx.size()));
      for (std::size_t c = 0; c < train_idx.size(); ++c)
        z_train.col(static_cast<Eigen::Index>(c)) = z.col(static_cast<Eigen::Index>(train_idx[c]));
      for (std::size_t c = 0; c < eval_idx.size(); ++c)
        z_eval.col(static_cast<Eigen::Index>(c)) = z.col(static_cast<Eigen::Index>(eval_idx[c]));
      const auto probe = fit_probe(z_train, y_train, validation.num_classes(), config.probe);
      pt.loss += cross_entropy(probe, z_eval, y_eval);
      pt.accuracy += accuracy(predict(probe, z_eval), y_eval);
    }
    pt.loss /= static_cast<double>(agents.size());
    pt.accuracy /= static_cast<double>(agents.size());
    curve.push_back(pt);
  }
  return curve;
}

PopulationMetrics evaluate_population(const std::vector<Agent>& agents, const LabeledDataset& train,
                                      const LabeledDataset& eval, const ProbeConfig& config) {
  if (agents.empty()) throw UsageError("evaluating an empty population");
  PopulationMetrics m;
  for (const auto& a : agents) {
    m.probes.push_back(train_probe(a, train, config));
    m.probe_accuracy.push_back(probe_accuracy(m.probes.back(), a, eval));
    m.reconstruction += reconstruction_error(a, eval);
  }
  m.mean_accuracy = std::accumulate(m.probe_accuracy.begin(), m.probe_accuracy.end(), 0.0) /
                    static_cast<double>(agents.size());
  m.reconstruction /= static_cast<double>(agents.size());
  if (agents.size() >= 2) {
    m.swap = swap_accuracy(m.probes, agents, eval);
    m.agreement = agreement(m.probes, agents, eval);
  }
  return m;
}

}  // namespace socsrl
