#include "socsrl/run_io.hpp"

#include "socsrl/errors.hpp"

#include <fstream>
#include <sstream>

namespace socsrl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string metrics_line(std::int64_t round, const LossBreakdown& l) {
  nlohmann::ordered_json j;
  j["round"] = round;
  j["l_ae"] = l.l_ae;
  j["l_mtm"] = l.l_mtm;
  j["l_dti"] = l.l_dti;
  j["l_dtd"] = l.l_dtd;
  j["total"] = l.total;
  return j.dump();
}

void write_metrics_jsonl(const fs::path& path, const std::vector<LossBreakdown>& stream) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  for (std::size_t r = 0; r < stream.size(); ++r)
    out << metrics_line(static_cast<std::int64_t>(r), stream[r]) << '\n';
  if (!out) throw FormatError("failed writing " + path.string());
}

std::vector<LossBreakdown> read_metrics_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<LossBreakdown> stream;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (!j.is_object() || j.size() != 6) throw FormatError(where + ": expected 6 keys");
    if (!j.contains("round") || !j["round"].is_number_integer() ||
        j["round"].get<std::int64_t>() != static_cast<std::int64_t>(stream.size()))
      throw FormatError(where + ": rounds must count up from 0");
    LossBreakdown l;
    for (auto [key, field] : {std::pair{"l_ae", &l.l_ae}, std::pair{"l_mtm", &l.l_mtm},
                              std::pair{"l_dti", &l.l_dti}, std::pair{"l_dtd", &l.l_dtd},
                              std::pair{"total", &l.total}}) {
      if (!j.contains(key) || !j[key].is_number()) throw FormatError(where + ": missing " + key);
      *field = j[key].get<double>();
    }
    stream.push_back(l);
  }
  return stream;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line/column for humans.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": invalid JSON (" + e.what() + ")");
  }
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw FormatError("failed writing " + path.string());
}

TrainConfig read_train_config(const fs::path& path) {
  auto config = train_config_from_json(read_json_file(path));
  config.validate();
  return config;
}

RunRecord train_to_directory(const TrainConfig& config, const DatasetSplit& data, const fs::path& dir) {
  config.validate();
  fs::create_directories(dir);
  write_json_file(dir / run_files::config, to_json(config));
  const std::string hash = config_hash(config);

  std::ofstream metrics(dir / run_files::metrics, std::ios::trunc);
  std::ofstream baseline_metrics(dir / run_files::baseline_metrics, std::ios::trunc);
  if (!metrics || !baseline_metrics) throw FormatError("cannot write metrics under " + dir.string());

  TrainHooks hooks;
  hooks.on_round = [&](std::int64_t round, const LossBreakdown& t, const LossBreakdown& b) {
    metrics << metrics_line(round, t) << '\n';
    baseline_metrics << metrics_line(round, b) << '\n';
  };
  hooks.on_checkpoint = [&](std::int64_t, const std::vector<Agent>& t, const std::vector<Agent>& b) {
    write_checkpoint(dir / run_files::treatment_ckpt, {config.seed, hash, "treatment", t});
    write_checkpoint(dir / run_files::baseline_ckpt, {config.seed, hash, "baseline", b});
  };

  RunRecord rec = train(config, data, hooks);
  metrics.close();
  baseline_metrics.close();
  if (!metrics || !baseline_metrics) throw FormatError("failed writing metrics under " + dir.string());

  write_json_file(dir / run_files::run_info, json{{"schema", "socsrl.run_info/1"},
                                                  {"config_hash", hash},
                                                  {"rounds", config.rounds},
                                                  {"wall_seconds", rec.wall_seconds}});
  return rec;
}

StoredRun load_run(const fs::path& dir) {
  StoredRun run;
  run.config = train_config_from_json(read_json_file(dir / run_files::config));
  run.config_hash = config_hash(run.config);
  run.treatment = read_checkpoint(dir / run_files::treatment_ckpt);
  run.baseline = read_checkpoint(dir / run_files::baseline_ckpt);
  for (const auto* c : {&run.treatment, &run.baseline})
    if (c->config_hash != run.config_hash)
      throw FormatError("checkpoint " + c->population + " in " + dir.string() +
                        " was written by config " + c->config_hash + ", config.json hashes to " +
                        run.config_hash);
  return run;
}

}  // namespace socsrl
