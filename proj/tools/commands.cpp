#include "commands.hpp"

#include "socsrl/errors.hpp"
#include "socsrl/evaluation.hpp"
#include "socsrl/experiments.hpp"
#include "socsrl/reports.hpp"
#include "socsrl/run_io.hpp"
#include "socsrl/sweep.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <tuple>

namespace socsrl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kMetricsCsv = "metrics.csv";
constexpr const char* kComparisonCsv = "comparison.csv";
constexpr const char* kSummaryJson = "summary.json";
constexpr const char* kDataEffCsv = "data_efficiency.csv";
constexpr std::string_view kDataEffHeader = "condition,seed,size,train_count,eval_count,loss,accuracy";

json metrics_json(const PopulationMetrics& m, std::size_t agents) {
  json j{{"probe_accuracy", m.probe_accuracy},
         {"mean_accuracy", m.mean_accuracy},
         {"reconstruction_error", m.reconstruction}};
  if (agents >= 2) {
    json matrix = json::array();
    for (Eigen::Index i = 0; i < m.swap.accuracy.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < m.swap.accuracy.cols(); ++k) row.push_back(m.swap.accuracy(i, k));
      matrix.push_back(row);
    }
    j["swap_matrix"] = matrix;
    j["swap_accuracy"] = m.swap.mean_off_diagonal;
    j["agreement"] = m.agreement;
  } else {
    j["swap_matrix"] = nullptr;
    j["swap_accuracy"] = nullptr;
    j["agreement"] = nullptr;
  }
  return j;
}

void append_rows(std::vector<MetricRow>& rows, const std::string& condition, std::uint64_t seed,
                 const PopulationMetrics& m, std::size_t agents) {
  rows.push_back({"probe_accuracy", condition, seed, m.mean_accuracy});
  if (agents >= 2) {
    rows.push_back({"swap_accuracy", condition, seed, m.swap.mean_off_diagonal});
    rows.push_back({"agreement", condition, seed, m.agreement});
  }
  rows.push_back({"reconstruction_error", condition, seed, m.reconstruction});
}

json comparisons_json(const std::vector<Comparison>& comparisons) {
  json arr = json::array();
  for (const auto& c : comparisons)
    arr.push_back({{"metric", c.metric},
                   {"condition", c.condition},
                   {"reference", c.reference},
                   {"report", to_json(c.report)}});
  return arr;
}

DatasetSplit dataset_for(const TrainConfig& config, const fs::path& override_spec) {
  if (override_spec.empty()) return load_dataset(config.dataset);
  return load_dataset(dataset_spec_from_json(read_json_file(override_spec)));
}

void write_outputs(const fs::path& out, const std::vector<MetricRow>& rows, const std::string& reference,
                   json summary) {
  const auto comparisons = compare_conditions(rows, reference);
  write_metric_rows(out / kMetricsCsv, rows);
  write_comparisons_csv(out / kComparisonCsv, comparisons);
  summary["comparisons"] = comparisons_json(comparisons);
  write_json_file(out / kSummaryJson, summary);
}

std::string alpha_label(double alpha) { return "alpha=" + format_double(alpha); }

}  // namespace

int cmd_train(const TrainArgs& args) {
  const TrainConfig config = read_train_config(args.config);
  const DatasetSplit data = load_dataset(config.dataset);
  const RunRecord rec = train_to_directory(config, data, args.out);
  const auto& last = rec.stream.back();
  std::cout << "trained " << config.rounds << " rounds (config " << rec.config_hash << ") in "
            << rec.wall_seconds << " s; final total loss " << last.total << "\n"
            << "run written to " << args.out.string() << "\n";
  return kExitOk;
}

int cmd_eval(const EvalArgs& args) {
  const StoredRun run = load_run(args.run);
  const DatasetSplit data = dataset_for(run.config, args.dataset);
  fs::create_directories(args.out);

  const auto& treated = run.treatment.agents;
  const auto& base = run.baseline.agents;
  const auto mt = evaluate_population(treated, data.train, data.validation);
  const auto mb = evaluate_population(base, data.train, data.validation);

  std::vector<MetricRow> rows;
  append_rows(rows, "treatment", run.config.seed, mt, treated.size());
  append_rows(rows, "baseline", run.config.seed, mb, base.size());
  write_metric_rows(args.out / kMetricsCsv, rows);

  json significance = nullptr;
  if (treated.size() >= 2 && base.size() >= 2)
    significance = to_json(welch_test(mt.probe_accuracy, mb.probe_accuracy));
  write_json_file(args.out / kSummaryJson,
                  {{"schema", "socsrl.eval_summary/1"},
                   {"config_hash", run.config_hash},
                   {"seed", run.config.seed},
                   {"conditions", {{"treatment", metrics_json(mt, treated.size())},
                                   {"baseline", metrics_json(mb, base.size())}}},
                   {"significance", {{"probe_accuracy", significance}}}});

  std::cout << "probe accuracy: treatment " << mt.mean_accuracy << ", baseline " << mb.mean_accuracy << "\n";
  if (treated.size() >= 2)
    std::cout << "swap accuracy " << mt.swap.mean_off_diagonal << ", agreement " << mt.agreement << "\n";
  return kExitOk;
}

int cmd_data_eff(const DataEffArgs& args) {
  const StoredRun run = load_run(args.run);
  const DatasetSplit data = dataset_for(run.config, args.dataset);
  fs::create_directories(args.out);

  DataEffConfig cfg;
  cfg.k = args.k;
  cfg.seed = args.seed;
  const auto treated = data_efficiency_curve(run.treatment.agents, data.validation, cfg);
  const auto base = data_efficiency_curve(run.baseline.agents, data.validation, cfg);

  std::ofstream csv(args.out / kDataEffCsv, std::ios::trunc);
  if (!csv) throw FormatError("cannot write " + (args.out / kDataEffCsv).string());
  csv << kDataEffHeader << '\n';
  std::vector<MetricRow> rows;
  json points = json::array();
  for (const auto& [name, curve] : {std::pair{"treatment", &treated}, std::pair{"baseline", &base}}) {
    for (const auto& p : *curve) {
      csv << name << ',' << run.config.seed << ',' << p.size << ',' << p.train_count << ','
          << p.eval_count << ',' << format_double(p.loss) << ',' << format_double(p.accuracy) << '\n';
      rows.push_back({"probe_loss@" + std::to_string(p.size), name, run.config.seed, p.loss});
      rows.push_back({"probe_accuracy@" + std::to_string(p.size), name, run.config.seed, p.accuracy});
    }
  }
  for (std::size_t k = 0; k < treated.size(); ++k)
    points.push_back({{"size", treated[k].size},
                      {"treatment_loss", treated[k].loss},
                      {"baseline_loss", base[k].loss},
                      {"loss_gap", base[k].loss - treated[k].loss}});
  csv.close();
  write_metric_rows(args.out / kMetricsCsv, rows);
  write_json_file(args.out / kSummaryJson, {{"schema", "socsrl.data_eff_summary/1"},
                                            {"config_hash", run.config_hash},
                                            {"seed", run.config.seed},
                                            {"k", args.k},
                                            {"points", points}});
  std::cout << "wrote " << treated.size() << " subset sizes to " << (args.out / kDataEffCsv).string() << "\n";
  return kExitOk;
}

int cmd_ablate(const AblateArgs& args) {
  const TrainConfig base = read_train_config(args.config);
  const DatasetSplit data = load_dataset(base.dataset);
  fs::create_directories(args.out);
  if (args.seeds < 1) throw ConfigError("--seeds must be >= 1");

  std::vector<MetricRow> rows;
  for (std::size_t s = 0; s < args.seeds; ++s) {
    for (SampleMode mode : {SampleMode::perspectives, SampleMode::shared_input}) {
      TrainConfig c = base;
      c.mode = mode;
      c.seed = base.seed + s;
      const std::string name{to_string(mode)};
      const auto rec = train_to_directory(c, data, args.out / "runs" / (name + "-seed" + std::to_string(c.seed)));
      append_rows(rows, name, c.seed, evaluate_population(rec.agents, data.train, data.validation),
                  rec.agents.size());
      // The co-trained autoencoders never see a cross-agent loss, so the
      // baseline is identical under both modes; record it once.
      if (mode == SampleMode::perspectives)
        append_rows(rows, "baseline", c.seed, evaluate_population(rec.baseline, data.train, data.validation),
                    rec.baseline.size());
      std::cout << name << " seed " << c.seed << " done\n";
    }
  }
  write_outputs(args.out, rows, "baseline",
                {{"schema", "socsrl.ablate_summary/1"}, {"config", to_json(base)}, {"seeds", args.seeds}});
  return kExitOk;
}

int cmd_interp(const InterpArgs& args) {
  const TrainConfig base = read_train_config(args.config);
  const DatasetSplit data = load_dataset(base.dataset);
  fs::create_directories(args.out);
  if (args.seeds < 1) throw ConfigError("--seeds must be >= 1");

  std::vector<MetricRow> rows;
  std::vector<double> recon, acc;
  json points = json::array();
  for (std::size_t s = 0; s < args.seeds; ++s) {
    TrainConfig c = base;
    c.seed = base.seed + s;
    for (const auto& pt : interpolation_sweep(c, args.alphas, data)) {
      rows.push_back({"reconstruction_error", alpha_label(pt.alpha), c.seed, pt.reconstruction});
      rows.push_back({"probe_accuracy", alpha_label(pt.alpha), c.seed, pt.accuracy});
      recon.push_back(pt.reconstruction);
      acc.push_back(pt.accuracy);
      points.push_back({{"alpha", pt.alpha},
                        {"seed", c.seed},
                        {"reconstruction_error", pt.reconstruction},
                        {"probe_accuracy", pt.accuracy}});
    }
  }
  json fit = nullptr;
  if (recon.size() >= 3) {
    const auto f = least_squares(recon, acc);
    const double n = static_cast<double>(recon.size());
    double p = 1.0;
    if (std::abs(f.r) >= 1.0) {
      p = 0.0;
    } else if (f.r != 0.0) {
      p = student_t_two_sided_p(f.r * std::sqrt((n - 2.0) / (1.0 - f.r * f.r)), n - 2.0);
    }
    fit = {{"slope", f.slope}, {"intercept", f.intercept}, {"r", f.r}, {"p", p}};
  }
  write_metric_rows(args.out / kMetricsCsv, rows);
  write_json_file(args.out / kSummaryJson, {{"schema", "socsrl.interp_summary/1"},
                                            {"config", to_json(base)},
                                            {"points", points},
                                            {"accuracy_vs_reconstruction", fit}});
  return kExitOk;
}

int cmd_sweep(const SweepArgs& args) {
  const TrainConfig base = read_train_config(args.config);
  const auto plan = plan_sweep(args.plan_seed, args.n_random, base, args.sigmas, args.seeds);
  std::cout << "sweep: " << plan.entries.size() << " configs x " << plan.seeds_per_config << " seeds\n";
  const auto result = execute_sweep(plan, args.out, args.jobs);
  std::size_t resumed = 0, failed = 0;
  for (const auto& r : result.runs) {
    resumed += r.resumed;
    failed += !r.ok;
  }
  std::cout << result.runs.size() << " runs (" << resumed << " resumed, " << failed << " failed); ranking in "
            << (args.out / "ranking.csv").string() << "\n";
  for (std::size_t k = 0; k < std::min<std::size_t>(5, result.ranking.size()); ++k) {
    const auto& row = result.rows[result.ranking[k]];
    std::cout << "  " << k + 1 << ". " << row.entry.alias << " sigma=" << row.entry.sigma
              << " accuracy=" << row.mean << "\n";
  }
  return kExitOk;
}

int cmd_report(const ReportArgs& args) {
  std::vector<MetricRow> rows;
  std::set<std::tuple<std::string, std::string, std::uint64_t>> seen;
  for (const auto& input : args.inputs) {
    const fs::path file = fs::is_directory(input) ? input / kMetricsCsv : input;
    for (auto& r : read_metric_rows(file)) {
      if (!seen.insert({r.metric, r.condition, r.seed}).second)
        throw ConfigError("duplicate row (" + r.metric + ", " + r.condition + ", seed " +
                          std::to_string(r.seed) + ") in " + file.string());
      rows.push_back(std::move(r));
    }
  }
  fs::create_directories(args.out);
  json inputs = json::array();
  for (const auto& i : args.inputs) inputs.push_back(i.string());
  write_outputs(args.out, rows, args.reference,
                {{"schema", "socsrl.report/1"}, {"reference", args.reference}, {"inputs", inputs}});
  for (const auto& c : compare_conditions(rows, args.reference))
    std::cout << c.metric << ": " << c.condition << " vs " << c.reference << "  p=" << c.report.p << " "
              << c.report.symbol << "\n";
  return kExitOk;
}

// --- artifact validation ---

namespace {

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  return line;
}

void validate_data_eff_csv(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string field; std::getline(ss, field, ',');) f.push_back(field);
    if (f.size() != 7) throw FormatError(path.string() + ":" + std::to_string(n) + ": expected 7 fields");
    const auto size = std::stoull(f[2]), train = std::stoull(f[3]), eval = std::stoull(f[4]);
    if (train + eval != size) throw FormatError(path.string() + ":" + std::to_string(n) + ": split does not add up");
  }
}

void require_keys(const json& j, std::initializer_list<const char*> keys, const fs::path& path) {
  for (const char* k : keys)
    if (!j.contains(k)) throw FormatError(path.string() + ": missing key '" + k + "'");
}

std::string validate_json_artifact(const fs::path& path) {
  const json j = read_json_file(path);
  if (!j.is_object()) throw FormatError(path.string() + ": expected a JSON object");
  const std::string schema = j.value("schema", "");
  if (schema == kTrainConfigSchema) {
    train_config_from_json(j).validate();
  } else if (schema == kSweepPlanSchema) {
    sweep_plan_from_json(j);
  } else if (schema == kSweepRunSchema) {
    require_keys(j, {"config_hash", "ok", "accuracy", "error"}, path);
  } else if (schema == "socsrl.run_info/1") {
    require_keys(j, {"config_hash", "rounds", "wall_seconds"}, path);
  } else if (schema == "socsrl.eval_summary/1") {
    require_keys(j, {"config_hash", "seed", "conditions", "significance"}, path);
    for (const char* c : {"treatment", "baseline"})
      require_keys(j.at("conditions").at(c),
                   {"probe_accuracy", "mean_accuracy", "reconstruction_error", "swap_matrix", "swap_accuracy",
                    "agreement"},
                   path);
  } else if (schema == "socsrl.data_eff_summary/1") {
    require_keys(j, {"config_hash", "seed", "k", "points"}, path);
  } else if (schema == "socsrl.ablate_summary/1" || schema == "socsrl.report/1") {
    require_keys(j, {"comparisons"}, path);
    for (const auto& c : j.at("comparisons")) {
      const double p = c.at("report").at("p").get<double>();
      if (c.at("report").at("symbol").get<std::string>() != significance_symbol(p))
        throw FormatError(path.string() + ": significance symbol does not match p");
    }
  } else if (schema == "socsrl.interp_summary/1") {
    require_keys(j, {"points", "accuracy_vs_reconstruction"}, path);
  } else if (schema.empty()) {
    throw FormatError(path.string() + ": no 'schema' key");
  } else {
    throw FormatError(path.string() + ": unknown schema '" + schema + "'");
  }
  return schema;
}

}  // namespace

int cmd_validate(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("no such file: " + path.string());
  const auto ext = path.extension().string();
  std::string kind;
  if (ext == ".jsonl") {
    kind = "metrics stream (" + std::to_string(read_metrics_jsonl(path).size()) + " rounds)";
  } else if (ext == ".ckpt") {
    const auto ck = read_checkpoint(path);
    kind = "checkpoint (" + ck.population + ", " + std::to_string(ck.agents.size()) + " agents)";
  } else if (ext == ".csv") {
    const auto header = first_line(path);
    if (header == kMetricsCsvHeader) {
      kind = "metrics table (" + std::to_string(read_metric_rows(path).size()) + " rows)";
    } else if (header == kComparisonCsvHeader) {
      validate_comparisons_csv(path);
      kind = "comparison table";
    } else if (header == kRankingCsvHeader) {
      validate_ranking_csv(path);
      kind = "sweep ranking";
    } else if (header == kDataEffHeader) {
      validate_data_eff_csv(path);
      kind = "data-efficiency table";
    } else {
      throw FormatError(path.string() + ": unrecognized CSV header");
    }
  } else if (ext == ".json") {
    kind = validate_json_artifact(path);
  } else {
    throw ConfigError("don't know how to validate '" + path.string() + "'");
  }
  std::cout << path.string() << ": valid " << kind << "\n";
  return kExitOk;
}

}  // namespace socsrl::cli
