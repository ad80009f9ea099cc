#include "one2one/gan.hpp"

#include <cmath>

#include "one2one/errors.hpp"
#include "one2one/ops.hpp"

namespace one2one::gan {

std::string to_string(Mode mode) { return mode == Mode::one2one ? "one2one" : "baseline"; }

Mode parse_mode(const std::string& text) {
  if (text == "one2one") return Mode::one2one;
  if (text == "baseline") return Mode::baseline;
  throw std::invalid_argument("unknown mode '" + text + "' (expected one2one or baseline)");
}

ImagePool::ImagePool(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(derive_seed(seed, "image-pool")) {
  stored_.reserve(capacity);
}

Tensor ImagePool::query(const Tensor& fake) {
  Tensor copy = fake.detach();
  if (capacity_ == 0) return copy;
  if (stored_.size() < capacity_) {
    stored_.push_back(copy);
    return copy;
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng_) < 0.5) return copy;
  std::uniform_int_distribution<std::size_t> pick(0, capacity_ - 1);
  const std::size_t slot = pick(rng_);
  Tensor previous = stored_[slot];
  stored_[slot] = copy;
  ++swaps_;
  return previous;
}

namespace {

optim::AdamState adam_for(const nn::Model& m) {
  const auto tensors = m.tensors();
  return optim::AdamState::for_parameters(tensors);
}

// Detaches a model's parameters from gradient tracking for the guard's lifetime.
class FrozenModel {
 public:
  explicit FrozenModel(const nn::Model& model) : params_(model.tensors()) {
    for (auto& p : params_) p.set_requires_grad(false);
  }
  ~FrozenModel() {
    for (auto& p : params_) p.set_requires_grad(true);
  }
  FrozenModel(const FrozenModel&) = delete;
  FrozenModel& operator=(const FrozenModel&) = delete;

 private:
  std::vector<Tensor> params_;
};

void require_finite(double value, std::size_t iteration, const char* name) {
  if (!std::isfinite(value)) throw TrainingError(iteration, name, value);
}

void step(nn::Model& model, optim::AdamState& state, double lr, const optim::AdamConfig& cfg) {
  auto params = model.tensors();
  optim::adam_step(params, state, lr, cfg);
}

}  // namespace

One2OneSystem make_one2one(const SystemConfig& cfg) {
  One2OneSystem s{
      nn::build_generator(cfg.generator, derive_seed(cfg.init_seed, "G")),
      nn::build_discriminator(cfg.discriminator, derive_seed(cfg.init_seed, "D_X")),
      nn::build_discriminator(cfg.discriminator, derive_seed(cfg.init_seed, "D_Y")),
      cfg.lambda_x,
      cfg.lambda_y,
      ImagePool(cfg.pool_capacity, derive_seed(cfg.train_seed, "pool-x")),
      ImagePool(cfg.pool_capacity, derive_seed(cfg.train_seed, "pool-y")),
      {},
      {},
      {},
      cfg.adam,
      cfg.schedule,
  };
  s.opt_G = adam_for(s.G);
  s.opt_DX = adam_for(s.D_X);
  s.opt_DY = adam_for(s.D_Y);
  return s;
}

BaselineSystem make_baseline(const SystemConfig& cfg) {
  BaselineSystem s{
      nn::build_generator(cfg.generator, derive_seed(cfg.init_seed, "G")),
      nn::build_generator(cfg.generator, derive_seed(cfg.init_seed, "F")),
      nn::build_discriminator(cfg.discriminator, derive_seed(cfg.init_seed, "D_X")),
      nn::build_discriminator(cfg.discriminator, derive_seed(cfg.init_seed, "D_Y")),
      cfg.lambda,
      ImagePool(cfg.pool_capacity, derive_seed(cfg.train_seed, "pool-x")),
      ImagePool(cfg.pool_capacity, derive_seed(cfg.train_seed, "pool-y")),
      {},
      {},
      {},
      {},
      cfg.adam,
      cfg.schedule,
  };
  s.opt_G = adam_for(s.G);
  s.opt_F = adam_for(s.F);
  s.opt_DX = adam_for(s.D_X);
  s.opt_DY = adam_for(s.D_Y);
  return s;
}

System make_system(Mode mode, const SystemConfig& cfg) {
  if (mode == Mode::one2one) return make_one2one(cfg);
  return make_baseline(cfg);
}

Mode mode_of(const System& system) {
  return std::holds_alternative<One2OneSystem>(system) ? Mode::one2one : Mode::baseline;
}

const nn::Model& x2y_generator(const System& system) {
  if (const auto* s = std::get_if<One2OneSystem>(&system)) return s->G;
  return std::get<BaselineSystem>(system).G;
}

const nn::Model& y2x_generator(const System& system) {
  if (const auto* s = std::get_if<One2OneSystem>(&system)) return s->G;
  return std::get<BaselineSystem>(system).F;
}

std::size_t generator_param_count(const System& system) {
  if (const auto* s = std::get_if<One2OneSystem>(&system)) return nn::param_count(s->G);
  const auto& b = std::get<BaselineSystem>(system);
  return nn::param_count(b.G) + nn::param_count(b.F);
}

Tensor adv_loss_G(Tape& tape, const nn::Model& D, const Tensor& fake) {
  Tensor score = nn::forward(D, fake, tape);
  return ad::mse_loss(tape, score, Tensor::full(score.shape(), 1.0));
}

Tensor adv_loss_D(Tape& tape, const nn::Model& D, const Tensor& real, const Tensor& fake_pooled) {
  Tensor real_score = nn::forward(D, real, tape);
  Tensor fake_score = nn::forward(D, fake_pooled.detach(), tape);
  Tensor real_term = ad::mse_loss(tape, real_score, Tensor::full(real_score.shape(), 1.0));
  Tensor fake_term = ad::mse_loss(tape, fake_score, Tensor::zeros(fake_score.shape()));
  return ad::scale(tape, ad::add(tape, real_term, fake_term), 0.5);
}

Tensor cycle_loss_x(Tape& tape, const nn::Model& G, const Tensor& x) {
  return ad::l1_loss(tape, nn::forward(G, nn::forward(G, x, tape), tape), x);
}

Tensor cycle_loss_y(Tape& tape, const nn::Model& G, const Tensor& y) {
  return ad::l1_loss(tape, nn::forward(G, nn::forward(G, y, tape), tape), y);
}

namespace {

DirectionLoss direction_loss(Tape& tape, const nn::Model& G, const nn::Model& D_target, double lambda,
                             const Tensor& input) {
  Tensor fake = nn::forward(G, input, tape);
  Tensor adv = adv_loss_G(tape, D_target, fake);
  Tensor cyc = ad::l1_loss(tape, nn::forward(G, fake, tape), input);
  Tensor total = ad::add(tape, adv, ad::scale(tape, cyc, lambda));
  return {total, adv, cyc, fake};
}

}  // namespace

DirectionLoss total_loss_x2y(Tape& tape, const One2OneSystem& system, const Tensor& x) {
  return direction_loss(tape, system.G, system.D_Y, system.lambda_x, x);
}

DirectionLoss total_loss_y2x(Tape& tape, const One2OneSystem& system, const Tensor& y) {
  return direction_loss(tape, system.G, system.D_X, system.lambda_y, y);
}

BaselineLoss baseline_losses(Tape& tape, const BaselineSystem& s, const Tensor& x, const Tensor& y) {
  Tensor fake_y = nn::forward(s.G, x, tape);
  Tensor fake_x = nn::forward(s.F, y, tape);
  Tensor adv_x2y = adv_loss_G(tape, s.D_Y, fake_y);
  Tensor adv_y2x = adv_loss_G(tape, s.D_X, fake_x);
  Tensor cyc_x = ad::l1_loss(tape, nn::forward(s.F, fake_y, tape), x);
  Tensor cyc_y = ad::l1_loss(tape, nn::forward(s.G, fake_x, tape), y);
  Tensor joint = ad::add(tape, ad::add(tape, adv_x2y, adv_y2x),
                         ad::scale(tape, ad::add(tape, cyc_x, cyc_y), s.lambda));
  return {joint, adv_x2y, cyc_x, adv_y2x, cyc_y, fake_y, fake_x};
}

namespace {

template <typename S>
void update_discriminators(S& s, const Tensor& x, const Tensor& y, const Tensor& fake_x, const Tensor& fake_y,
                           double lr, std::size_t iteration, IterationLosses& out) {
  Tape tape;
  s.D_Y.zero_grad();
  Tensor loss_dy = adv_loss_D(tape, s.D_Y, y, s.pool_y.query(fake_y));
  out.d_y = loss_dy.item();
  require_finite(out.d_y, iteration, "loss_dy");
  tape.backward(loss_dy);
  step(s.D_Y, s.opt_DY, lr, s.adam);

  s.D_X.zero_grad();
  Tensor loss_dx = adv_loss_D(tape, s.D_X, x, s.pool_x.query(fake_x));
  out.d_x = loss_dx.item();
  require_finite(out.d_x, iteration, "loss_dx");
  tape.backward(loss_dx);
  step(s.D_X, s.opt_DX, lr, s.adam);
}

}  // namespace

IterationLosses train_iteration_one2one(One2OneSystem& s, const Tensor& x, const Tensor& y, double lr,
                                        std::size_t iteration) {
  IterationLosses out;
  Tape tape;
  Tensor fake_y, fake_x;
  {
    FrozenModel freeze_dx(s.D_X), freeze_dy(s.D_Y);

    s.G.zero_grad();
    DirectionLoss forward_dir = total_loss_x2y(tape, s, x);
    out.x2y_adv = forward_dir.adv.item();
    out.x2y_cyc = forward_dir.cyc.item();
    require_finite(out.x2y_adv, iteration, "loss_x2y_adv");
    require_finite(out.x2y_cyc, iteration, "loss_x2y_cyc");
    fake_y = forward_dir.fake.detach();
    tape.backward(forward_dir.total);
    step(s.G, s.opt_G, lr, s.adam);

    s.G.zero_grad();
    DirectionLoss backward_dir = total_loss_y2x(tape, s, y);
    out.y2x_adv = backward_dir.adv.item();
    out.y2x_cyc = backward_dir.cyc.item();
    require_finite(out.y2x_adv, iteration, "loss_y2x_adv");
    require_finite(out.y2x_cyc, iteration, "loss_y2x_cyc");
    fake_x = backward_dir.fake.detach();
    tape.backward(backward_dir.total);
    step(s.G, s.opt_G, lr, s.adam);
    s.G.zero_grad();
  }
  update_discriminators(s, x, y, fake_x, fake_y, lr, iteration, out);
  return out;
}

IterationLosses train_iteration_baseline(BaselineSystem& s, const Tensor& x, const Tensor& y, double lr,
                                         std::size_t iteration) {
  IterationLosses out;
  Tensor fake_y, fake_x;
  {
    FrozenModel freeze_dx(s.D_X), freeze_dy(s.D_Y);
    Tape tape;
    s.G.zero_grad();
    s.F.zero_grad();
    BaselineLoss loss = baseline_losses(tape, s, x, y);
    out.x2y_adv = loss.adv_x2y.item();
    out.x2y_cyc = loss.cyc_x.item();
    out.y2x_adv = loss.adv_y2x.item();
    out.y2x_cyc = loss.cyc_y.item();
    require_finite(out.x2y_adv, iteration, "loss_x2y_adv");
    require_finite(out.x2y_cyc, iteration, "loss_x2y_cyc");
    require_finite(out.y2x_adv, iteration, "loss_y2x_adv");
    require_finite(out.y2x_cyc, iteration, "loss_y2x_cyc");
    fake_y = loss.fake_y.detach();
    fake_x = loss.fake_x.detach();
    tape.backward(loss.joint);
    step(s.G, s.opt_G, lr, s.adam);
    step(s.F, s.opt_F, lr, s.adam);
    s.G.zero_grad();
    s.F.zero_grad();
  }
  update_discriminators(s, x, y, fake_x, fake_y, lr, iteration, out);
  return out;
}

IterationLosses train_iteration(System& system, const Tensor& x, const Tensor& y, double lr,
                                std::size_t iteration) {
  if (auto* s = std::get_if<One2OneSystem>(&system)) return train_iteration_one2one(*s, x, y, lr, iteration);
  return train_iteration_baseline(std::get<BaselineSystem>(system), x, y, lr, iteration);
}

}  // namespace one2one::gan
