#pragma once

// Tabular metric reports.
//
// metrics.csv      metric,condition,seed,value
// comparison.csv   metric,condition,reference,n,mean,std,reference_n,reference_mean,
//                  reference_std,t,df,p,symbol

#include "socsrl/statistics.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace socsrl {

inline constexpr std::string_view kMetricsCsvHeader = "metric,condition,seed,value";
inline constexpr std::string_view kComparisonCsvHeader =
    "metric,condition,reference,n,mean,std,reference_n,reference_mean,reference_std,t,df,p,symbol";

struct MetricRow {
  std::string metric;
  std::string condition;
  std::uint64_t seed = 0;
  double value = 0.0;

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

/// Shortest text that reads back to the same double.
std::string format_double(double v);

void write_metric_rows(const std::filesystem::path& path, const std::vector<MetricRow>& rows);
/// Throws FormatError on a wrong header, wrong field count or unparsable value.
std::vector<MetricRow> read_metric_rows(const std::filesystem::path& path);

struct Comparison {
  std::string metric;
  std::string condition;
  std::string reference;
  SignificanceReport report;  // a = condition, b = reference
};

/// For every metric, Welch-tests each condition against `reference` over the
/// per-seed values. Conditions with fewer than 2 values on either side are skipped.
std::vector<Comparison> compare_conditions(const std::vector<MetricRow>& rows,
                                           const std::string& reference);

void write_comparisons_csv(const std::filesystem::path& path, const std::vector<Comparison>& comparisons);
void validate_comparisons_csv(const std::filesystem::path& path);

}  // namespace socsrl
