#include "socsrl/reports.hpp"

#include "socsrl/errors.hpp"

#include <charconv>
#include <limits>
#include <fstream>
#include <map>
#include <sstream>

namespace socsrl {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw FormatError(where + ": bad number '" + s + "'");
  return v;
}

void check_name(const std::string& s) {
  if (s.empty() || s.find_first_of(",\n\r\"") != std::string::npos)
    throw FormatError("metric and condition names must be non-empty and free of commas/quotes: '" + s + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw FormatError("cannot format number");
  return std::string(buf, ptr);
}

void write_metric_rows(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << kMetricsCsvHeader << '\n';
  for (const auto& r : rows) {
    check_name(r.metric);
    check_name(r.condition);
    out << r.metric << ',' << r.condition << ',' << r.seed << ',' << format_double(r.value) << '\n';
  }
  if (!out) throw FormatError("failed writing " + path.string());
}

std::vector<MetricRow> read_metric_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsCsvHeader)
    throw FormatError(path.string() + ": header must be '" + std::string(kMetricsCsvHeader) + "'");
  std::vector<MetricRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto where = path.string() + ":" + std::to_string(line_no);
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw FormatError(where + ": expected 4 fields");
    MetricRow r;
    r.metric = f[0];
    r.condition = f[1];
    if (r.metric.empty() || r.condition.empty()) throw FormatError(where + ": empty name");
    const auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), r.seed);
    if (ec != std::errc{} || ptr != f[2].data() + f[2].size()) throw FormatError(where + ": bad seed");
    r.value = parse_double(f[3], where);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<Comparison> compare_conditions(const std::vector<MetricRow>& rows, const std::string& reference) {
  // metric -> condition -> values, in first-seen order of metrics and conditions
  std::vector<std::string> metric_order;
  std::map<std::string, std::vector<std::string>> condition_order;
  std::map<std::pair<std::string, std::string>, std::vector<double>> values;
  for (const auto& r : rows) {
    if (!condition_order.count(r.metric)) metric_order.push_back(r.metric);
    auto& conds = condition_order[r.metric];
    auto& v = values[{r.metric, r.condition}];
    if (v.empty()) conds.push_back(r.condition);
    v.push_back(r.value);
  }

  std::vector<Comparison> out;
  for (const auto& metric : metric_order) {
    const auto ref = values.find({metric, reference});
    if (ref == values.end() || ref->second.size() < 2) continue;
    for (const auto& cond : condition_order[metric]) {
      if (cond == reference) continue;
      const auto& v = values[{metric, cond}];
      if (v.size() < 2) continue;
      out.push_back({metric, cond, reference, welch_test(v, ref->second)});
    }
  }
  return out;
}

void write_comparisons_csv(const std::filesystem::path& path, const std::vector<Comparison>& comparisons) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << kComparisonCsvHeader << '\n';
  for (const auto& c : comparisons) {
    const auto& r = c.report;
    out << c.metric << ',' << c.condition << ',' << c.reference << ',' << r.a.n << ','
        << format_double(r.a.mean) << ',' << format_double(r.a.std) << ',' << r.b.n << ','
        << format_double(r.b.mean) << ',' << format_double(r.b.std) << ',' << format_double(r.t)
        << ',' << format_double(r.df) << ',' << format_double(r.p) << ',' << r.symbol << '\n';
  }
  if (!out) throw FormatError("failed writing " + path.string());
}

void validate_comparisons_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kComparisonCsvHeader)
    throw FormatError(path.string() + ": header must be '" + std::string(kComparisonCsvHeader) + "'");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto where = path.string() + ":" + std::to_string(line_no);
    const auto f = split_csv_line(line);
    if (f.size() != 13) throw FormatError(where + ": expected 13 fields");
    for (std::size_t k : {4u, 5u, 7u, 8u, 9u, 10u, 11u}) parse_double(f[k], where);
    const double p = parse_double(f[11], where);
    if (!(p >= 0.0 && p <= 1.0)) throw FormatError(where + ": p outside [0, 1]");
    if (f[12] != significance_symbol(p)) throw FormatError(where + ": symbol does not match p");
  }
}

}  // namespace socsrl
