#pragma once

#include "one2one/tensor.hpp"

namespace one2one::ad {

// Every primitive records exactly one tape node when some input needs a gradient.

/// [m x k] * [k x n] -> [m x n]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

/// Elementwise, shapes must match exactly.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& x, double factor);

Tensor sum(Tape& tape, const Tensor& x);
Tensor mean(Tape& tape, const Tensor& x);

/// Same values, new shape.
Tensor reshape(Tape& tape, const Tensor& x, Shape shape);

/// input [c_in x h x w], kernels [c_out x c_in x k x k], zero padding.
/// Output [c_out x h' x w'] with h' = (h + 2 pad - k) / stride + 1.
Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& kernels, std::size_t stride,
              std::size_t pad);

/// Adds bias[c] to every element of channel c of a [c x h x w] tensor.
Tensor add_channel_bias(Tape& tape, const Tensor& x, const Tensor& bias);

Tensor leaky_relu(Tape& tape, const Tensor& x, double slope);
Tensor tanh_act(Tape& tape, const Tensor& x);

inline constexpr double kInstanceNormEps = 1e-5;

/// Per-channel (x - mean) / sqrt(biased_var + eps) over a [c x h x w] tensor.
Tensor instance_norm(Tape& tape, const Tensor& x, double eps = kInstanceNormEps);

/// Mean absolute difference (scalar).
Tensor l1_loss(Tape& tape, const Tensor& a, const Tensor& b);
/// Mean squared difference (scalar).
Tensor mse_loss(Tape& tape, const Tensor& a, const Tensor& b);

}  // namespace one2one::ad
