#include "socsrl/experiments.hpp"

#include "socsrl/errors.hpp"

#include <cmath>

namespace socsrl {

std::vector<InterpPoint> interpolation_sweep(const TrainConfig& base, const std::vector<double>& alphas,
                                             const DatasetSplit& data, const ProbeConfig& probe) {
  std::vector<InterpPoint> out;
  for (double alpha : alphas) {
    TrainConfig c = base;
    c.weights = interpolation_weights(alpha);
    InterpPoint pt;
    pt.alpha = alpha;
    pt.record = train(c, data);
    const auto m = evaluate_population(pt.record.agents, data.train, data.validation, probe);
    pt.reconstruction = m.reconstruction;
    pt.accuracy = m.mean_accuracy;
    out.push_back(std::move(pt));
  }
  return out;
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ShapeError("least squares needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit f;
  if (sxx > 0) f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (sxx > 0 && syy > 0) f.r = sxy / std::sqrt(sxx * syy);
  return f;
}

}  // namespace socsrl
