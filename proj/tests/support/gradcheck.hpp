#pragma once

// Central finite differences of the straight-line round loss against the
// library's analytic round gradients.

#include "socsrl/losses.hpp"

#include <cstdint>
#include <string>

namespace oracle {

struct GradCheckOptions {
  std::size_t obs_dim = 4;
  std::size_t hidden_dim = 5;
  std::size_t latent_dim = 2;
  std::size_t batch = 3;
  socsrl::Activation hidden = socsrl::Activation::tanh;
  socsrl::LossWeights weights{0.7, 0.4, 0.9, 0.3};
  double sigma = 0.0;
  socsrl::RoundOptions round;
  double h = 1e-5;
  // Relative error is |g - fd| / max(|g|, |fd|, floor).
  double floor = 1e-6;
};

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;        // relu kink crossed by the perturbation
  double loss_mismatch = 0.0;     // |oracle total - library total|
  std::string worst;              // which parameter had max_rel_err
};

GradCheckResult round_gradient_check(std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace oracle
