#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "one2one/data.hpp"
#include "one2one/errors.hpp"
#include "one2one/nn.hpp"
#include "one2one/optim.hpp"
#include "one2one/report.hpp"
#include "one2one/rng.hpp"

namespace one2one::gan {

using ad::Tape;
using ad::Tensor;

enum class Mode { one2one, baseline };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

/// History buffer of generator outputs feeding a discriminator. Fills up to
/// `capacity`, then answers each query with the new fake or, with probability
/// 1/2, a uniformly chosen stored fake that the new one replaces.
class ImagePool {
 public:
  explicit ImagePool(std::size_t capacity = 50, std::uint64_t seed = 0);

  /// Stores a detached copy; the returned tensor is never on a tape.
  Tensor query(const Tensor& fake);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return stored_.size(); }
  std::size_t swaps() const { return swaps_; }
  const std::vector<Tensor>& stored() const { return stored_; }

 private:
  std::size_t capacity_;
  std::vector<Tensor> stored_;
  Rng rng_;
  std::size_t swaps_ = 0;
};

struct SystemConfig {
  nn::GeneratorSpec generator;
  nn::DiscriminatorSpec discriminator;
  double lambda_x = 10.0;
  double lambda_y = 10.0;
  double lambda = 10.0;
  optim::AdamConfig adam;
  optim::Schedule schedule;
  std::size_t pool_capacity = 50;
  std::uint64_t init_seed = 1;
  std::uint64_t train_seed = 2;
};

/// One shared generator G serving both directions, two discriminators.
struct One2OneSystem {
  nn::Model G;
  nn::Model D_X;
  nn::Model D_Y;
  double lambda_x = 10.0;
  double lambda_y = 10.0;
  ImagePool pool_x;  // fakes in X, judged by D_X
  ImagePool pool_y;  // fakes in Y, judged by D_Y
  optim::AdamState opt_G;
  optim::AdamState opt_DX;
  optim::AdamState opt_DY;
  optim::AdamConfig adam;
  optim::Schedule schedule;
};

/// CycleGAN: G: X -> Y and F: Y -> X with identical specs.
struct BaselineSystem {
  nn::Model G;
  nn::Model F;
  nn::Model D_X;
  nn::Model D_Y;
  double lambda = 10.0;
  ImagePool pool_x;
  ImagePool pool_y;
  optim::AdamState opt_G;
  optim::AdamState opt_F;
  optim::AdamState opt_DX;
  optim::AdamState opt_DY;
  optim::AdamConfig adam;
  optim::Schedule schedule;
};

using System = std::variant<One2OneSystem, BaselineSystem>;

One2OneSystem make_one2one(const SystemConfig& cfg);
BaselineSystem make_baseline(const SystemConfig& cfg);
System make_system(Mode mode, const SystemConfig& cfg);

Mode mode_of(const System& system);
const nn::Model& x2y_generator(const System& system);
const nn::Model& y2x_generator(const System& system);
/// Total parameters across all generators of the system.
std::size_t generator_param_count(const System& system);

// ---- objectives (least-squares targets: real = 1, fake = 0) ----

/// mean((D(fake) - 1)^2); gradient reaches the generator through D.
Tensor adv_loss_G(Tape& tape, const nn::Model& D, const Tensor& fake);
/// 1/2 [ mean((D(real) - 1)^2) + mean(D(fake)^2) ].
Tensor adv_loss_D(Tape& tape, const nn::Model& D, const Tensor& real, const Tensor& fake_pooled);
/// |G(G(x)) - x|_1 (mean).
Tensor cycle_loss_x(Tape& tape, const nn::Model& G, const Tensor& x);
Tensor cycle_loss_y(Tape& tape, const nn::Model& G, const Tensor& y);

struct DirectionLoss {
  Tensor total;
  Tensor adv;
  Tensor cyc;
  Tensor fake;  // G(input), still on the tape
};

/// adv_loss_G(D_Y, G(x)) + lambda_x * |G(G(x)) - x|_1
DirectionLoss total_loss_x2y(Tape& tape, const One2OneSystem& system, const Tensor& x);
/// adv_loss_G(D_X, G(y)) + lambda_y * |G(G(y)) - y|_1
DirectionLoss total_loss_y2x(Tape& tape, const One2OneSystem& system, const Tensor& y);

struct BaselineLoss {
  Tensor joint;
  Tensor adv_x2y;  // adv_loss_G(D_Y, G(x))
  Tensor cyc_x;    // |F(G(x)) - x|_1
  Tensor adv_y2x;  // adv_loss_G(D_X, F(y))
  Tensor cyc_y;    // |G(F(y)) - y|_1
  Tensor fake_y;
  Tensor fake_x;
};

/// Joint generator objective adv_x2y + adv_y2x + lambda (cyc_x + cyc_y).
BaselineLoss baseline_losses(Tape& tape, const BaselineSystem& system, const Tensor& x, const Tensor& y);

// ---- training ----

struct IterationLosses {
  double x2y_adv = 0.0;
  double x2y_cyc = 0.0;
  double y2x_adv = 0.0;
  double y2x_cyc = 0.0;
  double d_x = 0.0;
  double d_y = 0.0;

  bool operator==(const IterationLosses&) const = default;
};

/// Step 1: G update on the X -> Y objective. Step 2: G update on the Y -> X
/// objective. Step 3: D_Y then D_X updates against pooled fakes from steps 1-2.
IterationLosses train_iteration_one2one(One2OneSystem& system, const Tensor& x, const Tensor& y, double lr,
                                        std::size_t iteration = 0);

/// One joint G/F update, then D_Y and D_X updates against pooled fakes.
IterationLosses train_iteration_baseline(BaselineSystem& system, const Tensor& x, const Tensor& y, double lr,
                                         std::size_t iteration = 0);

IterationLosses train_iteration(System& system, const Tensor& x, const Tensor& y, double lr,
                                std::size_t iteration = 0);

struct TrainConfig {
  Mode mode = Mode::one2one;
  SystemConfig system;
  int epochs = 200;
};

struct IterationRecord {
  std::size_t iteration = 0;
  int epoch = 0;
  double lr = 0.0;
  IterationLosses losses;
};

struct TrainHooks {
  std::function<void(const IterationRecord&)> on_iteration;
  /// Called after every `eval_every` epochs and after the final epoch.
  std::function<metrics::MetricsReport(const System&, int epochs_done)> evaluate;
  int eval_every = 0;
  std::function<void(const System&, int epochs_done)> on_checkpoint;
  int checkpoint_every = 0;
  /// Called with the partially trained system before a TrainingError propagates.
  std::function<void(const System&, const TrainingError&)> on_abort;
};

struct TrainResult {
  System system;
  std::vector<metrics::MetricsReport> history;
  std::size_t iterations = 0;
};

/// Epoch loop over independently shuffled X and Y samplers (one sample from
/// each per iteration). The learning rate follows the schedule per epoch.
TrainResult train(const data::TrainingData& data, const TrainConfig& config, const TrainHooks& hooks = {});

}  // namespace one2one::gan
