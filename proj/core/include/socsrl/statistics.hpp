#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <string_view>
#include <vector>

namespace socsrl {

struct GroupSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  std::size_t n = 0;
};

GroupSummary summarize(const std::vector<double>& values);

struct SignificanceReport {
  GroupSummary a;
  GroupSummary b;
  double t = 0.0;
  double df = 0.0;  // Welch-Satterthwaite
  double p = 1.0;   // two-sided
  std::string_view symbol = "ns";
};

/// Student-t CDF for real df > 0.
double student_t_cdf(double t, double df);

/// Two-sided p-value of |T| >= |t| under Student-t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Welch's unequal-variances t-test, t = (mean_a - mean_b) / se. Both
/// samples need n >= 2. If both variances are zero the test is degenerate:
/// equal means give t = 0, p = 1; different means give t = +-inf, p = 0.
/// df then falls back to n_a + n_b - 2.
SignificanceReport welch_test(const std::vector<double>& a, const std::vector<double>& b);

/// ns: p > 0.05, *: p <= 0.05, **: p <= 0.01, ***: p <= 0.001, ****: p <= 0.0001.
std::string_view significance_symbol(double p);

nlohmann::json to_json(const SignificanceReport& report);

}  // namespace socsrl
