#include "one2one/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace one2one::ad {

GradCheckResult finite_diff_check(const ScalarFnOfParams& f, std::span<Tensor> leaves, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw std::invalid_argument("finite_diff_check: eps must lie in [1e-7, 1e-3]");
  }
  GradCheckResult result;
  if (leaves.empty() ||
      std::any_of(leaves.begin(), leaves.end(), [](const Tensor& t) { return !t.requires_grad(); })) {
    return result;
  }

  for (auto& leaf : leaves) leaf.zero_grad();
  {
    Tape tape;
    Tensor loss = f(tape);
    tape.backward(loss);
  }

  auto evaluate = [&f] {
    Tape inference(Tape::Mode::inference);
    return f(inference).item();
  };

  double worst = 0.0;
  for (auto& leaf : leaves) {
    std::vector<double> analytic(leaf.size(), 0.0);
    if (leaf.has_grad()) std::copy(leaf.grad().begin(), leaf.grad().end(), analytic.begin());
    auto values = leaf.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + eps;
      const double plus = evaluate();
      values[i] = original - eps;
      const double minus = evaluate();
      values[i] = original;
      const double numeric = (plus - minus) / (2.0 * eps);
      worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric)));
      ++result.coordinates;
    }
  }
  result.max_error = worst;
  return result;
}

GradCheckResult finite_diff_check(const ScalarFn& f, Tensor x, double eps) {
  Tensor leaves[] = {x};
  return finite_diff_check([&](Tape& tape) { return f(tape, x); }, leaves, eps);
}

}  // namespace one2one::ad
