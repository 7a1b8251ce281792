#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace socsrl::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitVersion = 4;

struct TrainArgs {
  std::filesystem::path config;
  std::filesystem::path out;
};

struct EvalArgs {
  std::filesystem::path run;
  std::filesystem::path out;
  std::filesystem::path dataset;  // optional dataset spec JSON; default: the run's own
};

struct DataEffArgs {
  std::filesystem::path run;
  std::filesystem::path out;
  std::filesystem::path dataset;
  std::size_t k = 10;
  std::uint64_t seed = 0;
};

struct AblateArgs {
  std::filesystem::path config;
  std::filesystem::path out;
  std::size_t seeds = 5;
};

struct InterpArgs {
  std::filesystem::path config;
  std::filesystem::path out;
  std::vector<double> alphas{0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t seeds = 1;
};

struct SweepArgs {
  std::filesystem::path config;
  std::filesystem::path out;
  std::size_t n_random = 10;
  std::size_t seeds = 3;
  std::vector<double> sigmas{0.0, 0.33, 0.67, 1.0};
  std::uint64_t plan_seed = 0;
  std::size_t jobs = 1;
};

struct ReportArgs {
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path out;
  std::string reference = "baseline";
};

int cmd_train(const TrainArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_data_eff(const DataEffArgs& args);
int cmd_ablate(const AblateArgs& args);
int cmd_interp(const InterpArgs& args);
int cmd_sweep(const SweepArgs& args);
int cmd_report(const ReportArgs& args);

/// Checks any artifact this tool writes; prints what it found.
int cmd_validate(const std::filesystem::path& path);

}  // namespace socsrl::cli
