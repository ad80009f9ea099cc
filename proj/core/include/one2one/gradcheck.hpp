#pragma once

#include <functional>
#include <optional>
#include <span>

#include "one2one/tensor.hpp"

namespace one2one::ad {

/// Outcome of a central-difference gradient check. `max_error` is empty when
/// the check is undefined (the input does not require a gradient).
struct GradCheckResult {
  std::optional<double> max_error;
  std::size_t coordinates = 0;

  bool defined() const { return max_error.has_value(); }
};

using ScalarFn = std::function<Tensor(Tape&, const Tensor&)>;
using ScalarFnOfParams = std::function<Tensor(Tape&)>;

/// Max over coordinates of |analytic - numeric| / max(1, |numeric|).
/// eps must lie in [1e-7, 1e-3].
GradCheckResult finite_diff_check(const ScalarFn& f, Tensor x, double eps);

/// Same check over every coordinate of several leaves that `f` closes over.
GradCheckResult finite_diff_check(const ScalarFnOfParams& f, std::span<Tensor> leaves, double eps);

}  // namespace one2one::ad
