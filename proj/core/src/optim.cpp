#include "one2one/optim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "one2one/errors.hpp"

namespace one2one::optim {

AdamState AdamState::for_parameters(std::span<const ad::Tensor> params) {
  AdamState state;
  for (const auto& p : params) {
    state.m.emplace_back(p.size(), 0.0);
    state.v.emplace_back(p.size(), 0.0);
  }
  return state;
}

void adam_step(std::span<ad::Tensor> params, std::span<const std::vector<double>> grads, AdamState& state,
               double lr, const AdamConfig& cfg) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                         std::to_string(grads.size()) + " gradients, " + std::to_string(state.m.size()) +
                         " moment slots");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].size() || state.m[i].size() != params[i].size() ||
        state.v[i].size() != params[i].size()) {
      throw DimensionError("adam_step: size mismatch for parameter " + std::to_string(i) + " of shape " +
                           ad::to_string(params[i].shape()));
    }
  }
  if (lr < 0.0) throw std::invalid_argument("adam_step: negative learning rate");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw std::invalid_argument("adam_step: betas must lie in [0, 1)");
  }
  if (state.t == std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("adam_step: step counter overflow");

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].mutable_values();
    auto& m = state.m[i];
    auto& v = state.v[i];
    const auto& g = grads[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      w[j] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

void adam_step(std::span<ad::Tensor> params, AdamState& state, double lr, const AdamConfig& cfg) {
  std::vector<std::vector<double>> grads;
  grads.reserve(params.size());
  for (const auto& p : params) {
    if (p.has_grad()) {
      grads.emplace_back(p.grad().begin(), p.grad().end());
    } else {
      grads.emplace_back(p.size(), 0.0);
    }
  }
  adam_step(params, grads, state, lr, cfg);
}

double lr_at(const Schedule& schedule, int epoch) {
  if (epoch < schedule.fixed_epochs) return schedule.base_lr;
  if (schedule.decay_epochs <= 0) return 0.0;
  const double progress =
      static_cast<double>(epoch - schedule.fixed_epochs) / static_cast<double>(schedule.decay_epochs);
  return progress >= 1.0 ? 0.0 : schedule.base_lr * (1.0 - progress);
}

}  // namespace one2one::optim
