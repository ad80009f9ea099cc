#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "one2one/tensor.hpp"

namespace one2one::optim {

struct AdamConfig {
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamConfig&) const = default;
};

/// First/second moments mirror the parameter list they were created for.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t t = 0;

  static AdamState for_parameters(std::span<const ad::Tensor> params);
};

/// One bias-corrected Adam update with explicit gradients.
void adam_step(std::span<ad::Tensor> params, std::span<const std::vector<double>> grads, AdamState& state,
               double lr, const AdamConfig& cfg);

/// Same, reading each parameter's accumulated gradient (absent = zero).
void adam_step(std::span<ad::Tensor> params, AdamState& state, double lr, const AdamConfig& cfg);

/// Constant `base_lr` for `fixed_epochs`, then linear decay reaching zero at
/// `fixed_epochs + decay_epochs`.
struct Schedule {
  double base_lr = 2e-4;
  int fixed_epochs = 100;
  int decay_epochs = 100;

  bool operator==(const Schedule&) const = default;
};

double lr_at(const Schedule& schedule, int epoch);

}  // namespace one2one::optim
