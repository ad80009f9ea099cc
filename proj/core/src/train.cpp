#include <algorithm>
#include <stdexcept>

#include "one2one/gan.hpp"

namespace one2one::gan {

TrainResult train(const data::TrainingData& data, const TrainConfig& config, const TrainHooks& hooks) {
  if (config.epochs < 0) throw std::invalid_argument("train: negative epoch count");
  TrainResult result{make_system(config.mode, config.system), {}, 0};
  if (config.epochs == 0) return result;
  if (data.x.empty() || data.y.empty()) throw std::invalid_argument("train: empty domain in training data");

  // Independent streams for X and Y keep the sampled pairs unpaired.
  data::UnpairedSampler sample_x(data.x, derive_seed(config.system.train_seed, "sampler-x"));
  data::UnpairedSampler sample_y(data.y, derive_seed(config.system.train_seed, "sampler-y"));
  const std::size_t per_epoch = std::max(data.x.size(), data.y.size());

  std::size_t iteration = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = optim::lr_at(config.system.schedule, epoch);
    for (std::size_t i = 0; i < per_epoch; ++i) {
      const Tensor& x = sample_x.next();
      const Tensor& y = sample_y.next();
      IterationLosses losses;
      try {
        losses = train_iteration(result.system, x, y, lr, iteration);
      } catch (const TrainingError& e) {
        if (hooks.on_abort) hooks.on_abort(result.system, e);
        throw;
      }
      if (hooks.on_iteration) hooks.on_iteration({iteration, epoch, lr, losses});
      ++iteration;
    }
    const int done = epoch + 1;
    if (hooks.evaluate && ((hooks.eval_every > 0 && done % hooks.eval_every == 0) || done == config.epochs)) {
      result.history.push_back(hooks.evaluate(result.system, done));
    }
    if (hooks.on_checkpoint && hooks.checkpoint_every > 0 && done % hooks.checkpoint_every == 0) {
      hooks.on_checkpoint(result.system, done);
    }
  }
  result.iterations = iteration;
  return result;
}

}  // namespace one2one::gan
