#include "commands.hpp"

#include "socsrl/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace socsrl::cli;

namespace {

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const socsrl::VersionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVersion;
  } catch (const socsrl::NumericError& e) {
    std::cerr << "error: training diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const socsrl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const socsrl::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const socsrl::ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Populations of communicating autoencoders: training, evaluation and sweeps"};
  app.require_subcommand(0, 1);

  std::string validate_path;
  app.add_option("--validate", validate_path, "Check an artifact (config, metrics, checkpoint, report) and exit");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a population and its autoencoder baseline");
  train_cmd->add_option("--config", train.config, "Run config JSON")->required();
  train_cmd->add_option("--out", train.out, "Run directory")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Probe, swap and agreement metrics for a trained run");
  eval_cmd->add_option("--ckpt", eval.run, "Run directory written by 'train'")->required();
  eval_cmd->add_option("--out", eval.out, "Report directory")->required();
  eval_cmd->add_option("--dataset", eval.dataset, "Dataset spec JSON (default: the run's dataset)");

  DataEffArgs deff;
  auto* deff_cmd = app.add_subcommand("data-eff", "Probe loss versus evaluation subset size");
  deff_cmd->add_option("--ckpt", deff.run, "Run directory written by 'train'")->required();
  deff_cmd->add_option("--out", deff.out, "Report directory")->required();
  deff_cmd->add_option("--dataset", deff.dataset, "Dataset spec JSON (default: the run's dataset)");
  deff_cmd->add_option("--k", deff.k, "Number of subset sizes")->capture_default_str();
  deff_cmd->add_option("--seed", deff.seed, "Subset sampling seed")->capture_default_str();

  AblateArgs ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Paired perspectives / shared-input runs");
  ablate_cmd->add_option("--config", ablate.config, "Run config JSON")->required();
  ablate_cmd->add_option("--out", ablate.out, "Output directory")->required();
  ablate_cmd->add_option("--seeds", ablate.seeds, "Seeds per condition")->capture_default_str();

  InterpArgs interp;
  auto* interp_cmd = app.add_subcommand("interp", "Interpolate eta_ae against eta_dti = 1 - eta_ae");
  interp_cmd->add_option("--config", interp.config, "Base run config JSON")->required();
  interp_cmd->add_option("--out", interp.out, "Output directory")->required();
  interp_cmd->add_option("--alphas", interp.alphas, "eta_ae grid")->delimiter(',')->capture_default_str();
  interp_cmd->add_option("--seeds", interp.seeds, "Seeds per grid point")->capture_default_str();

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Random loss-weight search over a noise grid");
  sweep_cmd->add_option("--config", sweep.config, "Base run config JSON")->required();
  sweep_cmd->add_option("--out", sweep.out, "Sweep directory (resumable)")->required();
  sweep_cmd->add_option("--n-random", sweep.n_random, "Random weight draws")->capture_default_str();
  sweep_cmd->add_option("--seeds", sweep.seeds, "Seeds per config")->capture_default_str();
  sweep_cmd->add_option("--sigmas", sweep.sigmas, "Channel noise grid")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--plan-seed", sweep.plan_seed, "Seed of the weight draws")->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep.jobs, "Concurrent runs")->capture_default_str();

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Merge metric tables and test conditions against a reference");
  report_cmd->add_option("inputs", report.inputs, "Report directories or metrics.csv files")->required();
  report_cmd->add_option("--out", report.out, "Output directory")->required();
  report_cmd->add_option("--reference", report.reference, "Reference condition")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (!validate_path.empty()) {
    if (!app.get_subcommands().empty()) {
      std::cerr << "error: --validate takes no subcommand\n";
      return kExitUsage;
    }
    return guarded([&] { return cmd_validate(validate_path); });
  }
  if (*train_cmd) return guarded([&] { return cmd_train(train); });
  if (*eval_cmd) return guarded([&] { return cmd_eval(eval); });
  if (*deff_cmd) return guarded([&] { return cmd_data_eff(deff); });
  if (*ablate_cmd) return guarded([&] { return cmd_ablate(ablate); });
  if (*interp_cmd) return guarded([&] { return cmd_interp(interp); });
  if (*sweep_cmd) return guarded([&] { return cmd_sweep(sweep); });
  if (*report_cmd) return guarded([&] { return cmd_report(report); });

  std::cerr << app.help();
  return kExitUsage;
}
