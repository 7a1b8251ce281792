#pragma once

// Emulated multi-agent environment: a labelled dataset stands in for the
// hidden state, and distinct same-class samples stand in for perspectives.

#include "socsrl/rng.hpp"
#include "socsrl/sample_mode.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace socsrl {

using ClassId = std::uint32_t;

/// Immutable class-indexed sample store. Observations are columns in [0, 1].
class LabeledDataset {
 public:
  LabeledDataset() = default;

  /// Validates: labels < num_classes, every class non-empty, values in
  /// [0, 1] and no duplicate observation within a class.
  LabeledDataset(Eigen::MatrixXd observations, std::vector<ClassId> labels,
                 std::size_t num_classes);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t observation_dim() const noexcept { return static_cast<std::size_t>(observations_.rows()); }
  std::size_t num_classes() const noexcept { return class_index_.size(); }

  const Eigen::MatrixXd& observations() const noexcept { return observations_; }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }
  const std::vector<std::size_t>& class_indices(ClassId c) const { return class_index_.at(c); }
  std::size_t smallest_class_size() const;

  /// Columns at the given sample indices, in order.
  Eigen::MatrixXd gather(const std::vector<std::size_t>& indices) const;
  std::vector<ClassId> gather_labels(const std::vector<std::size_t>& indices) const;

  /// Sub-dataset with the given samples (duplicates in `indices` rejected).
  LabeledDataset subset(const std::vector<std::size_t>& indices) const;

 private:
  Eigen::MatrixXd observations_;
  std::vector<ClassId> labels_;
  std::vector<std::vector<std::size_t>> class_index_;
};

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset validation;
};

/// Stratified hold-out: round(fraction * N_s) samples of every class go to
/// the validation set.
DatasetSplit split_holdout(const LabeledDataset& ds, double validation_fraction, std::uint64_t seed);

/// One round of observations. `views[k]` are the sample indices privately
/// observed by the k-th participating agent; all share the label `state`.
struct RoundSample {
  ClassId state = 0;
  std::vector<std::vector<std::size_t>> views;
  SampleMode mode = SampleMode::perspectives;

  /// Batch that `sender` encodes when messaging `receiver`: the sender's own
  /// view under perspectives, the receiver's view under shared input.
  const std::vector<std::size_t>& exchange_batch(std::size_t receiver, std::size_t sender) const;
};

/// Draws s uniformly from the classes, then agent_count * batch_size distinct
/// samples of class s uniformly without replacement. The random stream
/// consumed does not depend on `mode`.
RoundSample sample_round(const LabeledDataset& ds, std::size_t agent_count, std::size_t batch_size,
                         SampleMode mode, Rng& rng);

/// Throws ConfigError unless every class holds at least agent_count * batch_size samples.
void check_round_feasible(const LabeledDataset& ds, std::size_t agent_count, std::size_t batch_size);

// --- IDX container (big-endian, unsigned-byte images) ---

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Pixels are scaled to [0, 1] by 1/255.
LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Inverse of load_idx for datasets whose values are multiples of 1/255.
/// rows * cols must equal the observation dim; 0 picks a square or 1 x D.
void write_idx(const LabeledDataset& ds, const std::filesystem::path& images,
               const std::filesystem::path& labels, std::size_t rows = 0, std::size_t cols = 0);

// --- synthetic perspectives ---

struct SynthOptions {
  /// Rank of the view subspace shared by all classes. 0 jitters every
  /// component independently.
  std::size_t view_rank = 16;
  /// Probability that a component receives the per-sample mask perturbation.
  double mask_fraction = 0.1;
  /// Amplitude of the per-sample mask perturbation; 0 disables the mask.
  double mask_noise = 0.05;
};

/// Per class a fixed prototype in [0.25, 0.75]^obs_dim. Each sample adds a
/// view offset B z with z ~ U[-view_noise, view_noise]^R and B a fixed
/// random +-1/sqrt(R) basis, then the sparse mask, and is clipped to [0, 1].
/// Per component the view jitter has the same spread for every R.
LabeledDataset synth_perspectives(std::size_t num_classes, std::size_t samples_per_class,
                                  std::size_t obs_dim, double view_noise, std::uint64_t seed,
                                  const SynthOptions& options = {});

}  // namespace socsrl
