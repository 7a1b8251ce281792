#pragma once

// Hyperparameter search: random loss-weight draws crossed with a noise grid,
// plus the four one-hot (single loss) configurations on the same grid.
//
// Results live in a directory tree:
//   <dir>/plan.json
//   <dir>/runs/<config hash>/{config.json, metrics.jsonl, ..., result.json}
//   <dir>/ranking.csv

#include "socsrl/evaluation.hpp"
#include "socsrl/trainer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace socsrl {

inline constexpr std::string_view kSweepPlanSchema = "socsrl.sweep_plan/1";
inline constexpr std::string_view kSweepRunSchema = "socsrl.sweep_run/1";
inline constexpr std::string_view kRankingCsvHeader =
    "eta_ae,eta_mtm,eta_dti,eta_dtd,accuracy,alias,sigma,accuracy_std,seeds,failures,status";

struct SweepEntry {
  LossWeights weights;
  double sigma = 0.0;
  std::string alias;  // "random-<k>" or the one-hot name (AE, MTM, DTI, DTD)
};

struct SweepPlan {
  std::uint64_t seed = 0;
  std::size_t n_random = 10;
  std::vector<double> sigma_grid{0.0, 0.33, 0.67, 1.0};
  std::size_t seeds_per_config = 3;
  TrainConfig base;
  std::vector<SweepEntry> entries;

  /// Training config of one (entry, seed index) job: base with the entry's
  /// weights and sigma, seed = base.seed + seed index.
  TrainConfig run_config(std::size_t entry, std::size_t seed_index) const;
};

/// n_random draws (each eta ~ U[0, 1]) x sigma_grid, then the one-hot
/// configurations x sigma_grid. Deterministic in `seed`.
SweepPlan plan_sweep(std::uint64_t seed, std::size_t n_random, const TrainConfig& base,
                     std::vector<double> sigma_grid = {0.0, 0.33, 0.67, 1.0},
                     std::size_t seeds_per_config = 3);

nlohmann::json to_json(const SweepPlan& plan);
SweepPlan sweep_plan_from_json(const nlohmann::json& j);

struct SweepRun {
  std::size_t entry = 0;
  std::size_t seed_index = 0;
  std::string config_hash;
  bool ok = false;
  bool resumed = false;  // loaded from an earlier execution
  std::string error;
  double accuracy = 0.0;
};

struct SweepRow {
  SweepEntry entry;
  std::vector<double> accuracies;  // successful seeds, in seed order
  double mean = 0.0;
  double std = 0.0;
  std::size_t failures = 0;
};

struct SweepResult {
  std::vector<SweepRun> runs;
  std::vector<SweepRow> rows;          // one per plan entry, plan order
  std::vector<std::size_t> ranking;    // row indices, best first, failed rows last
};

/// Runs every (entry, seed) job not already completed under `dir` using up to
/// `parallelism` worker threads. A failing run is recorded, never fatal.
SweepResult execute_sweep(const SweepPlan& plan, const std::filesystem::path& dir,
                          std::size_t parallelism = 1, const ProbeConfig& probe = {});

/// Columns: eta_ae, eta_mtm, eta_dti, eta_dtd, accuracy, alias, then sigma,
/// accuracy_std, seeds, failures, status. Rows in ranking order.
void write_ranking_csv(const SweepResult& result, const std::filesystem::path& path);
void validate_ranking_csv(const std::filesystem::path& path);

}  // namespace socsrl
