#pragma once

#include "socsrl/evaluation.hpp"
#include "socsrl/trainer.hpp"

#include <vector>

namespace socsrl {

struct InterpPoint {
  double alpha = 0.0;           // eta_ae; eta_dti = 1 - alpha
  double reconstruction = 0.0;  // mean over agents, on the validation set
  double accuracy = 0.0;        // mean probe accuracy over agents, on the validation set
  RunRecord record;
};

/// One run per alpha, every run with base.seed and the base data lineage.
std::vector<InterpPoint> interpolation_sweep(const TrainConfig& base, const std::vector<double>& alphas,
                                             const DatasetSplit& data, const ProbeConfig& probe = {});

/// Ordinary least squares slope and Pearson correlation of y on x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
};
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace socsrl
