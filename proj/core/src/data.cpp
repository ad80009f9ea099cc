#include "one2one/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "one2one/errors.hpp"

namespace one2one::data {

DomainTask::DomainTask(std::string name, ad::Shape shape, std::uint64_t seed, std::size_t n, Draw draw_x,
                       Draw draw_y, std::optional<TruthOracle> truth)
    : name_(std::move(name)),
      shape_(std::move(shape)),
      seed_(seed),
      n_(n),
      draw_x_(std::move(draw_x)),
      draw_y_(std::move(draw_y)),
      truth_(std::move(truth)) {}

std::vector<Tensor> DomainTask::sample_x(std::uint64_t seed, std::size_t n) const {
  Rng rng = make_rng(seed, "domain-x");
  std::vector<Tensor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw_x_(rng));
  return out;
}

std::vector<Tensor> DomainTask::sample_y(std::uint64_t seed, std::size_t n) const {
  Rng rng = make_rng(seed, "domain-y");
  std::vector<Tensor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw_y_(rng));
  return out;
}

TrainingData DomainTask::training_data() const {
  if (fixed_) return {name_, shape_, fixed_->first, fixed_->second};
  const auto stream = derive_seed(seed_, "train");
  return {name_, shape_, sample_x(stream, n_), sample_y(stream, n_)};
}

void DomainTask::set_fixed_training(std::vector<Tensor> x, std::vector<Tensor> y) {
  n_ = std::max(x.size(), y.size());
  fixed_.emplace(std::move(x), std::move(y));
}

namespace {

struct Component {
  double weight;
  double u;
  double v;
};

double clipped_normal(Rng& rng, double sigma) {
  std::normal_distribution<double> dist(0.0, 1.0);
  double z = 0.0;
  do {
    z = dist(rng);
  } while (std::abs(z) > 3.0);
  return sigma * z;
}

template <std::size_t N>
Tensor draw_mixture(Rng& rng, const std::array<Component, N>& comps, double sigma) {
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  double r = pick(rng);
  std::size_t k = 0;
  while (k + 1 < N && r >= comps[k].weight) {
    r -= comps[k].weight;
    ++k;
  }
  return Tensor({1, 2}, {comps[k].u + clipped_normal(rng, sigma), comps[k].v + clipped_normal(rng, sigma)});
}

void require_task_size(std::size_t n) {
  if (n < 100) throw SpecError("synthetic tasks need n >= 100, got " + std::to_string(n));
}

Tensor reflect(const Tensor& p) { return Tensor({1, 2}, {-p.at(0), p.at(1)}); }

}  // namespace

DomainTask make_reflection_task(std::uint64_t seed, std::size_t n, double margin) {
  require_task_size(n);
  if (!(margin >= 0.0 && margin <= 0.48)) throw SpecError("reflection task margin must lie in [0, 0.48]");
  static constexpr std::array<Component, 3> kComps{{{0.5, -0.55, -0.45}, {0.3, -0.45, 0.05}, {0.2, -0.6, 0.5}}};
  constexpr double kSigma = 0.07;
  const double half_gap = margin / 2.0;

  auto draw_x = [half_gap](Rng& rng) {
    Tensor p = draw_mixture(rng, kComps, kSigma);
    if (p.at(0) > -half_gap) throw std::logic_error("reflection task: X sample violates support margin");
    return p;
  };
  auto draw_y = [draw_x](Rng& rng) { return reflect(draw_x(rng)); };
  return DomainTask("reflection", {1, 2}, seed, n, draw_x, draw_y, TruthOracle(reflect, reflect));
}

DomainTask make_affine_task(std::uint64_t seed, std::size_t n, const AffineParams& params) {
  require_task_size(n);
  const double theta = params.angle_deg * std::numbers::pi / 180.0;
  const double a11 = params.scale * std::cos(theta), a12 = -params.scale * std::sin(theta);
  const double a21 = params.scale * std::sin(theta), a22 = params.scale * std::cos(theta);
  const double det = a11 * a22 - a12 * a21;
  if (std::abs(det) < 1e-6) throw SpecError("affine task: matrix is within 1e-6 of singular");
  const bool involution = std::abs(a11 * a11 + a12 * a21 - 1.0) < 1e-12 && std::abs(a11 * a12 + a12 * a22) < 1e-12 &&
                          std::abs(a21 * a11 + a22 * a21) < 1e-12 && std::abs(a21 * a12 + a22 * a22 - 1.0) < 1e-12;
  if (involution) throw SpecError("affine task: parameters produce an involution; use the reflection task");

  constexpr double cx_u = -0.5, cx_v = 0.0, cy_u = 0.5, cy_v = 0.0;
  static constexpr std::array<Component, 3> kComps{{{0.45, -0.55, -0.3}, {0.35, -0.4, 0.0}, {0.2, -0.55, 0.3}}};
  constexpr double kSigma = 0.05;
  const double half_gap = params.margin / 2.0;

  auto forward = [=](const Tensor& p) {
    const double du = p.at(0) - cx_u, dv = p.at(1) - cx_v;
    return Tensor({1, 2}, {a11 * du + a12 * dv + cy_u, a21 * du + a22 * dv + cy_v});
  };
  auto inverse = [=](const Tensor& q) {
    const double du = q.at(0) - cy_u, dv = q.at(1) - cy_v;
    return Tensor({1, 2}, {(a22 * du - a12 * dv) / det + cx_u, (-a21 * du + a11 * dv) / det + cx_v});
  };
  auto draw_x = [half_gap](Rng& rng) {
    Tensor p = draw_mixture(rng, kComps, kSigma);
    if (p.at(0) > -half_gap) throw std::logic_error("affine task: X sample violates support margin");
    return p;
  };
  auto draw_y = [draw_x, forward, half_gap](Rng& rng) {
    Tensor q = forward(draw_x(rng));
    if (q.at(0) < half_gap) throw SpecError("affine task: parameters push Y samples inside the margin");
    return q;
  };
  DomainTask task("affine", {1, 2}, seed, n, draw_x, draw_y, TruthOracle(forward, inverse));
  task.sample_y(seed, 256);  // fail fast on parameters that break the margin
  return task;
}

DomainTask make_image_inversion_task(std::uint64_t seed, std::size_t n, std::size_t height, std::size_t width,
                                     double margin) {
  if (height == 0 || width == 0 || height > 32 || width > 32) {
    throw SpecError("image inversion task needs 1 <= h, w <= 32");
  }
  if (n == 0) throw SpecError("image inversion task needs n >= 1");
  const double half_gap = margin / 2.0;
  const double unit = static_cast<double>(std::min(height, width)) / 16.0;

  auto draw_x = [=](Rng& rng) {
    std::uniform_int_distribution<int> count(1, 3);
    std::uniform_real_distribution<double> amp(-0.5, 1.5);
    std::uniform_real_distribution<double> spread(1.5 * unit, 3.0 * unit);
    std::uniform_real_distribution<double> cy(0.0, static_cast<double>(height - 1));
    std::uniform_real_distribution<double> cx(0.0, static_cast<double>(width - 1));
    for (;;) {
      std::vector<double> field(height * width, 0.4);
      const int blobs = count(rng);
      for (int b = 0; b < blobs; ++b) {
        const double a = amp(rng), s = spread(rng), y0 = cy(rng), x0 = cx(rng);
        for (std::size_t i = 0; i < height; ++i)
          for (std::size_t j = 0; j < width; ++j) {
            const double dy = static_cast<double>(i) - y0, dx = static_cast<double>(j) - x0;
            field[i * width + j] += a * std::exp(-(dy * dy + dx * dx) / (2.0 * s * s));
          }
      }
      double total = 0.0;
      for (auto& v : field) {
        v = std::tanh(v);
        total += v;
      }
      if (total / static_cast<double>(field.size()) >= half_gap) return Tensor({1, height, width}, std::move(field));
    }
  };
  auto negate = [](const Tensor& img) {
    std::vector<double> v(img.values().begin(), img.values().end());
    for (auto& x : v) x = -x;
    return Tensor(img.shape(), std::move(v));
  };
  auto draw_y = [draw_x, negate](Rng& rng) { return negate(draw_x(rng)); };
  return DomainTask("image_inversion", {1, height, width}, seed, n, draw_x, draw_y, TruthOracle(negate, negate));
}

DomainTask make_overlap_stress_task(std::uint64_t seed, std::size_t n) {
  require_task_size(n);
  static constexpr std::array<Component, 2> kComps{{{0.5, -0.25, -0.3}, {0.5, 0.15, 0.35}}};
  constexpr double kSigma = 0.1;
  auto draw_x = [](Rng& rng) { return draw_mixture(rng, kComps, kSigma); };
  auto draw_y = [](Rng& rng) { return reflect(draw_mixture(rng, kComps, kSigma)); };
  return DomainTask("overlap_stress", {1, 2}, seed, n, draw_x, draw_y, TruthOracle(reflect, reflect));
}

UnpairedSampler::UnpairedSampler(std::vector<Tensor> samples, std::uint64_t seed)
    : samples_(std::move(samples)), order_(samples_.size()), rng_(derive_seed(seed, "sampler")) {
  if (samples_.empty()) throw std::invalid_argument("UnpairedSampler: empty domain");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  reshuffle();
}

const Tensor& UnpairedSampler::next() {
  if (cursor_ == order_.size()) {
    reshuffle();
    cursor_ = 0;
    ++epoch_;
  }
  return samples_[order_[cursor_++]];
}

void UnpairedSampler::reshuffle() { std::shuffle(order_.begin(), order_.end(), rng_); }

}  // namespace one2one::data
