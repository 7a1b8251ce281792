#include "socsrl/environment.hpp"

#include "socsrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <unordered_map>

namespace socsrl {

namespace {

std::uint64_t column_hash(const Eigen::MatrixXd& m, Eigen::Index col) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::uint64_t bits;
    const double v = m(r, col) == 0.0 ? 0.0 : m(r, col);  // fold -0.0
    std::memcpy(&bits, &v, sizeof bits);
    h = mix64(h ^ bits);
  }
  return h;
}

}  // namespace

LabeledDataset::LabeledDataset(Eigen::MatrixXd observations, std::vector<ClassId> labels,
                               std::size_t num_classes)
    : observations_(std::move(observations)), labels_(std::move(labels)) {
  if (static_cast<std::size_t>(observations_.cols()) != labels_.size())
    throw ShapeError("dataset has " + std::to_string(observations_.cols()) + " observations but " +
                     std::to_string(labels_.size()) + " labels");
  if (num_classes == 0) throw ConfigError("dataset needs at least one class");
  if (observations_.rows() == 0) throw ShapeError("dataset observations have zero dimension");
  if (!observations_.allFinite() || observations_.minCoeff() < 0.0 || observations_.maxCoeff() > 1.0)
    throw ConfigError("dataset observations must lie in [0, 1]");

  class_index_.assign(num_classes, {});
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= num_classes)
      throw ConfigError("label " + std::to_string(labels_[i]) + " out of range for " +
                        std::to_string(num_classes) + " classes");
    class_index_[labels_[i]].push_back(i);
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (class_index_[c].empty()) throw ConfigError("class " + std::to_string(c) + " has no samples");
    std::unordered_multimap<std::uint64_t, std::size_t> seen;
    seen.reserve(class_index_[c].size());
    for (std::size_t i : class_index_[c]) {
      const auto h = column_hash(observations_, static_cast<Eigen::Index>(i));
      auto [lo, hi] = seen.equal_range(h);
      for (auto it = lo; it != hi; ++it)
        if (observations_.col(static_cast<Eigen::Index>(it->second)) ==
            observations_.col(static_cast<Eigen::Index>(i)))
          throw ConfigError("class " + std::to_string(c) + " contains duplicate observations (samples " +
                            std::to_string(it->second) + " and " + std::to_string(i) + ")");
      seen.emplace(h, i);
    }
  }
}

std::size_t LabeledDataset::smallest_class_size() const {
  std::size_t n = class_index_.empty() ? 0 : class_index_.front().size();
  for (const auto& idx : class_index_) n = std::min(n, idx.size());
  return n;
}

Eigen::MatrixXd LabeledDataset::gather(const std::vector<std::size_t>& indices) const {
  Eigen::MatrixXd out(observations_.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = observations_.col(static_cast<Eigen::Index>(indices.at(k)));
  return out;
}

std::vector<ClassId> LabeledDataset::gather_labels(const std::vector<std::size_t>& indices) const {
  std::vector<ClassId> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels_.at(i));
  return out;
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const {
  return LabeledDataset(gather(indices), gather_labels(indices), num_classes());
}

DatasetSplit split_holdout(const LabeledDataset& ds, double validation_fraction, std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw ConfigError("validation fraction must lie in (0, 1)");
  Rng rng = make_rng(seed, "split_holdout");
  std::vector<std::size_t> train, val;
  for (std::size_t c = 0; c < ds.num_classes(); ++c) {
    auto idx = ds.class_indices(static_cast<ClassId>(c));
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(idx.size())));
    if (n_val == 0 || n_val >= idx.size())
      throw ConfigError("class " + std::to_string(c) + " too small to split");
    val.insert(val.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    train.insert(train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {ds.subset(train), ds.subset(val)};
}

const std::vector<std::size_t>& RoundSample::exchange_batch(std::size_t receiver,
                                                            std::size_t sender) const {
  return mode == SampleMode::perspectives ? views.at(sender) : views.at(receiver);
}

void check_round_feasible(const LabeledDataset& ds, std::size_t agent_count, std::size_t batch_size) {
  if (agent_count == 0 || batch_size == 0) throw ConfigError("agent count and batch size must be >= 1");
  const std::size_t need = agent_count * batch_size;
  for (std::size_t c = 0; c < ds.num_classes(); ++c)
    if (ds.class_indices(static_cast<ClassId>(c)).size() < need)
      throw ConfigError("class " + std::to_string(c) + " has " +
                        std::to_string(ds.class_indices(static_cast<ClassId>(c)).size()) +
                        " samples; a round needs " + std::to_string(need) + " distinct ones");
}

RoundSample sample_round(const LabeledDataset& ds, std::size_t agent_count, std::size_t batch_size,
                         SampleMode mode, Rng& rng) {
  check_round_feasible(ds, agent_count, batch_size);
  RoundSample rs;
  rs.mode = mode;
  std::uniform_int_distribution<std::size_t> pick_class(0, ds.num_classes() - 1);
  rs.state = static_cast<ClassId>(pick_class(rng));

  // Partial Fisher-Yates over a copy of the class index list.
  auto pool = ds.class_indices(rs.state);
  const std::size_t need = agent_count * batch_size;
  for (std::size_t k = 0; k < need; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
    std::swap(pool[k], pool[pick(rng)]);
  }
  rs.views.resize(agent_count);
  for (std::size_t a = 0; a < agent_count; ++a)
    rs.views[a].assign(pool.begin() + static_cast<std::ptrdiff_t>(a * batch_size),
                       pool.begin() + static_cast<std::ptrdiff_t>((a + 1) * batch_size));
  return rs;
}

LabeledDataset synth_perspectives(std::size_t num_classes, std::size_t samples_per_class,
                                  std::size_t obs_dim, double view_noise, std::uint64_t seed,
                                  const SynthOptions& options) {
  if (num_classes == 0 || samples_per_class == 0) throw ConfigError("synthetic dataset needs classes and samples");
  if (obs_dim < num_classes) throw ConfigError("synthetic dataset needs obs_dim >= num_classes");
  if (view_noise < 0.0 || options.mask_noise < 0.0 || options.mask_fraction < 0.0 ||
      options.mask_fraction > 1.0)
    throw ConfigError("synthetic noise parameters must be non-negative (mask fraction <= 1)");

  const auto D = static_cast<Eigen::Index>(obs_dim);
  const auto R = static_cast<Eigen::Index>(options.view_rank);

  Rng proto_rng = make_rng(seed, "synth/prototypes");
  std::uniform_real_distribution<double> proto_u(0.25, 0.75);
  Eigen::MatrixXd prototypes(D, static_cast<Eigen::Index>(num_classes));
  for (Eigen::Index c = 0; c < prototypes.cols(); ++c)
    for (Eigen::Index d = 0; d < D; ++d) prototypes(d, c) = proto_u(proto_rng);

  Eigen::MatrixXd basis;  // D x R
  if (R > 0) {
    Rng basis_rng = make_rng(seed, "synth/view_basis");
    std::bernoulli_distribution coin(0.5);
    const double scale = 1.0 / std::sqrt(static_cast<double>(R));
    basis.resize(D, R);
    for (Eigen::Index r = 0; r < R; ++r)
      for (Eigen::Index d = 0; d < D; ++d) basis(d, r) = coin(basis_rng) ? scale : -scale;
  }

  Rng sample_rng = make_rng(seed, "synth/samples");
  std::uniform_real_distribution<double> jitter(-view_noise, view_noise);
  std::uniform_real_distribution<double> mask_u(-options.mask_noise, options.mask_noise);
  std::bernoulli_distribution masked(options.mask_fraction);

  const std::size_t n = num_classes * samples_per_class;
  Eigen::MatrixXd obs(D, static_cast<Eigen::Index>(n));
  std::vector<ClassId> labels(n);
  Eigen::VectorXd z(std::max<Eigen::Index>(R, 1));
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t k = 0; k < samples_per_class; ++k) {
      const auto col = static_cast<Eigen::Index>(c * samples_per_class + k);
      Eigen::VectorXd x = prototypes.col(static_cast<Eigen::Index>(c));
      if (R > 0) {
        for (Eigen::Index r = 0; r < R; ++r) z(r) = jitter(sample_rng);
        x.noalias() += basis * z.head(R);
      } else {
        for (Eigen::Index d = 0; d < D; ++d) x(d) += jitter(sample_rng);
      }
      if (options.mask_noise > 0.0)
        for (Eigen::Index d = 0; d < D; ++d)
          if (masked(sample_rng)) x(d) += mask_u(sample_rng);
      obs.col(col) = x.cwiseMax(0.0).cwiseMin(1.0);
      labels[static_cast<std::size_t>(col)] = static_cast<ClassId>(c);
    }
  }
  return LabeledDataset(std::move(obs), std::move(labels), num_classes);
}

}  // namespace socsrl
