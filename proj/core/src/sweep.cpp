#include "socsrl/sweep.hpp"

#include "socsrl/errors.hpp"
#include "socsrl/run_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace socsrl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kResultFile = "result.json";

struct OneHot {
  const char* alias;
  LossWeights weights;
};

const OneHot kOneHot[] = {
    {"AE", {1.0, 0.0, 0.0, 0.0}},
    {"MTM", {0.0, 1.0, 0.0, 0.0}},
    {"DTI", {0.0, 0.0, 1.0, 0.0}},
    {"DTD", {0.0, 0.0, 0.0, 1.0}},
};

json weights_json(const LossWeights& w) {
  return {{"eta_ae", w.eta_ae}, {"eta_mtm", w.eta_mtm}, {"eta_dti", w.eta_dti}, {"eta_dtd", w.eta_dtd}};
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

TrainConfig SweepPlan::run_config(std::size_t entry, std::size_t seed_index) const {
  TrainConfig c = base;
  c.weights = entries.at(entry).weights;
  c.sigma = entries.at(entry).sigma;
  c.seed = base.seed + seed_index;
  return c;
}

SweepPlan plan_sweep(std::uint64_t seed, std::size_t n_random, const TrainConfig& base,
                     std::vector<double> sigma_grid, std::size_t seeds_per_config) {
  for (double s : sigma_grid)
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("sigma grid values must be finite and >= 0");
  if (seeds_per_config < 1) throw ConfigError("seeds_per_config must be >= 1");
  SweepPlan plan;
  plan.seed = seed;
  plan.n_random = n_random;
  plan.sigma_grid = std::move(sigma_grid);
  plan.seeds_per_config = seeds_per_config;
  plan.base = base;

  Rng rng = make_rng(seed, "sweep/weights");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t k = 0; k < n_random; ++k) {
    LossWeights w;
    w.eta_ae = u(rng);
    w.eta_mtm = u(rng);
    w.eta_dti = u(rng);
    w.eta_dtd = u(rng);
    for (double s : plan.sigma_grid) plan.entries.push_back({w, s, "random-" + std::to_string(k)});
  }
  for (const auto& h : kOneHot)
    for (double s : plan.sigma_grid) plan.entries.push_back({h.weights, s, h.alias});
  return plan;
}

json to_json(const SweepPlan& plan) {
  json entries = json::array();
  for (const auto& e : plan.entries)
    entries.push_back({{"alias", e.alias}, {"sigma", e.sigma}, {"weights", weights_json(e.weights)}});
  return {{"schema", std::string(kSweepPlanSchema)},
          {"seed", plan.seed},
          {"n_random", plan.n_random},
          {"sigma_grid", plan.sigma_grid},
          {"seeds_per_config", plan.seeds_per_config},
          {"base", to_json(plan.base)},
          {"entries", entries}};
}

SweepPlan sweep_plan_from_json(const json& j) {
  try {
    if (j.contains("schema") && j.at("schema").get<std::string>() != kSweepPlanSchema)
      throw ConfigError("unsupported sweep plan schema");
    auto plan = plan_sweep(j.at("seed").get<std::uint64_t>(), j.at("n_random").get<std::size_t>(),
                           train_config_from_json(j.at("base")),
                           j.at("sigma_grid").get<std::vector<double>>(),
                           j.at("seeds_per_config").get<std::size_t>());
    if (j.contains("entries") && to_json(plan).at("entries") != j.at("entries"))
      throw ConfigError("sweep plan entries do not match what its seed generates");
    return plan;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed sweep plan: ") + e.what());
  }
}

SweepResult execute_sweep(const SweepPlan& plan, const fs::path& dir, std::size_t parallelism,
                          const ProbeConfig& probe) {
  plan.base.validate();
  fs::create_directories(dir / "runs");
  write_json_file(dir / "plan.json", to_json(plan));
  const DatasetSplit data = load_dataset(plan.base.dataset);

  SweepResult result;
  for (std::size_t e = 0; e < plan.entries.size(); ++e)
    for (std::size_t s = 0; s < plan.seeds_per_config; ++s) {
      SweepRun run;
      run.entry = e;
      run.seed_index = s;
      run.config_hash = config_hash(plan.run_config(e, s));
      result.runs.push_back(run);
    }

  auto execute_one = [&](SweepRun& run) {
    const fs::path run_dir = dir / "runs" / run.config_hash;
    const fs::path result_path = run_dir / kResultFile;
    if (fs::exists(result_path)) {
      try {
        const json r = read_json_file(result_path);
        if (r.at("config_hash").get<std::string>() == run.config_hash) {
          run.ok = r.at("ok").get<bool>();
          run.accuracy = r.at("accuracy").get<double>();
          run.error = r.at("error").get<std::string>();
          run.resumed = true;
          return;
        }
      } catch (const std::exception&) {
        // unreadable result: run again
      }
    }
    try {
      const TrainConfig config = plan.run_config(run.entry, run.seed_index);
      const RunRecord rec = train_to_directory(config, data, run_dir);
      run.accuracy = evaluate_population(rec.agents, data.train, data.validation, probe).mean_accuracy;
      run.ok = true;
    } catch (const std::exception& e) {
      run.ok = false;
      run.accuracy = 0.0;
      run.error = e.what();
    }
    fs::create_directories(run_dir);
    write_json_file(result_path, {{"schema", std::string(kSweepRunSchema)},
                                  {"config_hash", run.config_hash},
                                  {"ok", run.ok},
                                  {"accuracy", run.accuracy},
                                  {"error", run.error}});
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < result.runs.size(); k = next++) execute_one(result.runs[k]);
  };
  const std::size_t threads = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(result.runs.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t e = 0; e < plan.entries.size(); ++e) {
    SweepRow row;
    row.entry = plan.entries[e];
    for (const auto& run : result.runs)
      if (run.entry == e) {
        if (run.ok)
          row.accuracies.push_back(run.accuracy);
        else
          ++row.failures;
      }
    const auto n = row.accuracies.size();
    for (double a : row.accuracies) row.mean += a;
    if (n > 0) row.mean /= static_cast<double>(n);
    if (n > 1) {
      double ss = 0.0;
      for (double a : row.accuracies) ss += (a - row.mean) * (a - row.mean);
      row.std = std::sqrt(ss / static_cast<double>(n - 1));
    }
    result.rows.push_back(std::move(row));
  }

  result.ranking.resize(result.rows.size());
  for (std::size_t k = 0; k < result.ranking.size(); ++k) result.ranking[k] = k;
  std::stable_sort(result.ranking.begin(), result.ranking.end(), [&](std::size_t a, std::size_t b) {
    const bool fa = result.rows[a].failures > 0, fb = result.rows[b].failures > 0;
    if (fa != fb) return fb;
    return result.rows[a].mean > result.rows[b].mean;
  });

  write_ranking_csv(result, dir / "ranking.csv");
  return result;
}

void write_ranking_csv(const SweepResult& result, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << kRankingCsvHeader << '\n';
  for (std::size_t k : result.ranking) {
    const auto& r = result.rows[k];
    const auto& w = r.entry.weights;
    out << num(w.eta_ae) << ',' << num(w.eta_mtm) << ',' << num(w.eta_dti) << ',' << num(w.eta_dtd)
        << ',' << num(r.mean) << ',' << r.entry.alias << ',' << num(r.entry.sigma) << ','
        << num(r.std) << ',' << r.accuracies.size() << ',' << r.failures << ','
        << (r.failures > 0 ? "FAILED" : "ok") << '\n';
  }
  if (!out) throw FormatError("failed writing " + path.string());
}

void validate_ranking_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kRankingCsvHeader)
    throw FormatError(path.string() + ": header must be '" + std::string(kRankingCsvHeader) + "'");
  std::size_t line_no = 1;
  bool seen_failed = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto where = path.string() + ":" + std::to_string(line_no);
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string field; std::getline(ss, field, ',');) f.push_back(field);
    if (f.size() != 11) throw FormatError(where + ": expected 11 fields");
    for (std::size_t k : {0u, 1u, 2u, 3u, 4u, 6u, 7u}) {
      try {
        std::size_t used = 0;
        std::stod(f[k], &used);
        if (used != f[k].size()) throw std::invalid_argument(f[k]);
      } catch (const std::exception&) {
        throw FormatError(where + ": bad number '" + f[k] + "'");
      }
    }
    if (f[10] != "ok" && f[10] != "FAILED") throw FormatError(where + ": status must be ok or FAILED");
    if (f[10] == "FAILED") seen_failed = true;
    else if (seen_failed) throw FormatError(where + ": failed rows must be ranked last");
  }
}

}  // namespace socsrl
