#include "socsrl/statistics.hpp"

#include "socsrl/errors.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <limits>

namespace socsrl {

GroupSummary summarize(const std::vector<double>& values) {
  GroupSummary g;
  g.n = values.size();
  if (g.n == 0) return g;
  for (double v : values) g.mean += v;
  g.mean /= static_cast<double>(g.n);
  if (g.n < 2) return g;
  double ss = 0.0;
  for (double v : values) ss += (v - g.mean) * (v - g.mean);
  g.std = std::sqrt(ss / static_cast<double>(g.n - 1));
  return g;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ConfigError("t distribution needs df > 0");
  if (std::isnan(t)) throw NumericError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  // P(|T| >= |t|) = I_{df / (df + t^2)}(df / 2, 1 / 2)
  const double x = df / (df + t * t);
  return boost::math::ibeta(df / 2.0, 0.5, x);
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t < 0.0 ? tail : 1.0 - tail;
}

SignificanceReport welch_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw ConfigError("Welch's t-test needs at least 2 values per group");
  SignificanceReport r;
  r.a = summarize(a);
  r.b = summarize(b);
  const double va = r.a.std * r.a.std / static_cast<double>(r.a.n);
  const double vb = r.b.std * r.b.std / static_cast<double>(r.b.n);
  const double diff = r.a.mean - r.b.mean;

  if (va + vb == 0.0) {
    r.df = static_cast<double>(r.a.n + r.b.n - 2);
    if (diff == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
      r.p = 0.0;
    }
  } else {
    r.t = diff / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) /
           (va * va / static_cast<double>(r.a.n - 1) + vb * vb / static_cast<double>(r.b.n - 1));
    r.p = student_t_two_sided_p(r.t, r.df);
  }
  r.symbol = significance_symbol(r.p);
  return r;
}

std::string_view significance_symbol(double p) {
  if (p <= 0.0001) return "****";
  if (p <= 0.001) return "***";
  if (p <= 0.01) return "**";
  if (p <= 0.05) return "*";
  return "ns";
}

nlohmann::json to_json(const SignificanceReport& r) {
  auto group = [](const GroupSummary& g) {
    return nlohmann::json{{"mean", g.mean}, {"std", g.std}, {"n", g.n}};
  };
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  return {{"a", group(r.a)}, {"b", group(r.b)}, {"t", finite_or_null(r.t)},
          {"df", r.df},      {"p", r.p},        {"symbol", std::string(r.symbol)}};
}

}  // namespace socsrl
