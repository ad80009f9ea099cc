#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "one2one/data.hpp"
#include "one2one/gan.hpp"
#include "one2one/nn.hpp"
#include "one2one/report.hpp"

namespace one2one::metrics {

using ad::Tensor;

/// Returned by `psnr` when the mean squared error is zero (or the value would exceed it).
inline constexpr double kPsnrCap = 99.0;
inline constexpr std::size_t kSsimWindow = 7;
inline constexpr double kSsimSigma = 1.5;

/// 10 log10(range^2 / MSE), capped at kPsnrCap.
double psnr(const Tensor& a, const Tensor& b, double data_range);

/// Mean local SSIM over all window positions that fit inside the image
/// (Gaussian weights, C1 = (0.01 range)^2, C2 = (0.03 range)^2). Accepts
/// [h x w] or [c x h x w]; channels are averaged.
double ssim(const Tensor& a, const Tensor& b, double data_range, std::size_t window = kSsimWindow,
            double sigma = kSsimSigma);

/// SSIM statistic with one uniform window spanning every element; used for
/// point-cloud tasks that have no spatial layout.
double ssim_global(std::span<const double> a, std::span<const double> b, double data_range);

/// Mean over samples of |G(G(z)) - z|_1.
double self_inverse_residual(const nn::Model& G, std::span<const Tensor> samples);
/// Mean over samples of |second(first(z)) - z|_1.
double composite_residual(const nn::Model& first, const nn::Model& second, std::span<const Tensor> samples);

double euclidean_distance(const Tensor& a, const Tensor& b);
double median_pairwise_distance(std::span<const Tensor> samples);

/// Fraction of pairs (i < j) with |in_i - in_j| > eps_in but |out_i - out_j| < eps_out.
double injectivity_score(std::span<const Tensor> inputs, std::span<const Tensor> outputs, double eps_in,
                         double eps_out);
double injectivity_score(const nn::Model& G, std::span<const Tensor> samples, double eps_in, double eps_out);

/// Mean distance between G(s) and the ground-truth translation of s: L2 for
/// point tasks, mean absolute pixel error for image tasks.
double bias_gap(const nn::Model& G, const data::DomainTask& task, data::Direction direction,
                std::span<const Tensor> samples);

/// Held-out evaluation in both directions on `n_eval` fresh samples per
/// domain. The held-out stream is derived from `seed` with a tag no training
/// stream uses. Injectivity is the worse of the two directions; eps_in/eps_out
/// are reported for X -> Y (0.1 x median input distance, 0.01 x median target
/// distance).
MetricsReport evaluate(const gan::System& system, const data::DomainTask& task, std::size_t n_eval,
                       std::uint64_t seed);

}  // namespace one2one::metrics
