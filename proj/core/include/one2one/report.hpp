#pragma once

#include <string>

namespace one2one::metrics {

/// One evaluation of a system against a task's held-out samples.
struct MetricsReport {
  int epoch = 0;
  double psnr_x2y = 0.0;
  double psnr_y2x = 0.0;
  double ssim_x2y = 0.0;
  double ssim_y2x = 0.0;
  /// one2one: mean L1 of G(G(z)) - z over z in X and Y.
  /// baseline: mean L1 of F(G(x)) - x over X and G(F(y)) - y over Y.
  double self_inverse_residual = 0.0;
  std::string residual_kind;
  double injectivity_score = 0.0;
  double eps_in = 0.0;
  double eps_out = 0.0;
  double bias_gap_x2y = 0.0;
  double bias_gap_y2x = 0.0;

  bool operator==(const MetricsReport&) const = default;
};

}  // namespace one2one::metrics
