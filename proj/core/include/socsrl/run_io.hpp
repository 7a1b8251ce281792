#pragma once

// On-disk layout of one training run:
//
//   <dir>/config.json            the TrainConfig (schema socsrl.train_config/1)
//   <dir>/metrics.jsonl          treatment population, one object per round
//   <dir>/baseline_metrics.jsonl co-trained autoencoders, same format
//   <dir>/treatment.ckpt         final (or latest) treatment checkpoint
//   <dir>/baseline.ckpt          final (or latest) baseline checkpoint
//   <dir>/run.json               hash, round count, wall-clock seconds

#include "socsrl/checkpoint.hpp"
#include "socsrl/trainer.hpp"

#include <filesystem>
#include <iosfwd>

namespace socsrl {

namespace run_files {
inline constexpr const char* config = "config.json";
inline constexpr const char* metrics = "metrics.jsonl";
inline constexpr const char* baseline_metrics = "baseline_metrics.jsonl";
inline constexpr const char* treatment_ckpt = "treatment.ckpt";
inline constexpr const char* baseline_ckpt = "baseline.ckpt";
inline constexpr const char* run_info = "run.json";
}  // namespace run_files

/// {"round":r,"l_ae":..,"l_mtm":..,"l_dti":..,"l_dtd":..,"total":..}
std::string metrics_line(std::int64_t round, const LossBreakdown& losses);
void write_metrics_jsonl(const std::filesystem::path& path, const std::vector<LossBreakdown>& stream);
/// Validates every line (keys, types, consecutive rounds from 0).
std::vector<LossBreakdown> read_metrics_jsonl(const std::filesystem::path& path);

/// Parses a config file; JSON syntax errors become ConfigError with line and column.
TrainConfig read_train_config(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Trains and persists the run into `dir` (created if needed; existing run
/// files are overwritten). Metrics are streamed as rounds complete.
RunRecord train_to_directory(const TrainConfig& config, const DatasetSplit& data,
                             const std::filesystem::path& dir);

struct StoredRun {
  TrainConfig config;
  std::string config_hash;
  PopulationCheckpoint treatment;
  PopulationCheckpoint baseline;
};

/// Reads config.json and both checkpoints; checks that their hashes agree.
StoredRun load_run(const std::filesystem::path& dir);

}  // namespace socsrl
