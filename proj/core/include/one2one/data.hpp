#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "one2one/rng.hpp"
#include "one2one/tensor.hpp"

namespace one2one::data {

using ad::Tensor;

enum class Direction { x2y, y2x };

/// Ground-truth bijection f: X -> Y and its inverse. Evaluation only: nothing
/// in the training path accepts or returns one.
class TruthOracle {
 public:
  using Map = std::function<Tensor(const Tensor&)>;

  TruthOracle(Map to_y, Map to_x) : to_y_(std::move(to_y)), to_x_(std::move(to_x)) {}

  Tensor to_y(const Tensor& x) const { return to_y_(x); }
  Tensor to_x(const Tensor& y) const { return to_x_(y); }
  Tensor translate(const Tensor& sample, Direction dir) const {
    return dir == Direction::x2y ? to_y(sample) : to_x(sample);
  }

 private:
  Map to_y_;
  Map to_x_;
};

/// What training is allowed to see: two unpaired sample sets.
struct TrainingData {
  std::string name;
  ad::Shape shape;
  std::vector<Tensor> x;
  std::vector<Tensor> y;
};

/// A pair of sample sources plus an optional ground-truth oracle.
class DomainTask {
 public:
  using Draw = std::function<Tensor(Rng&)>;

  DomainTask(std::string name, ad::Shape shape, std::uint64_t seed, std::size_t n, Draw draw_x, Draw draw_y,
             std::optional<TruthOracle> truth);

  const std::string& name() const { return name_; }
  const ad::Shape& shape() const { return shape_; }
  bool is_image() const { return shape_.size() == 3; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return n_; }

  /// Fresh draws; X and Y use independent streams even for equal seeds.
  std::vector<Tensor> sample_x(std::uint64_t seed, std::size_t n) const;
  std::vector<Tensor> sample_y(std::uint64_t seed, std::size_t n) const;

  /// The task's own (seed, n) training sets, or the stored sets for file-backed tasks.
  TrainingData training_data() const;

  const TruthOracle* truth() const { return truth_ ? &*truth_ : nullptr; }

  /// Replaces draw-based training sets with fixed ones (file-backed tasks).
  void set_fixed_training(std::vector<Tensor> x, std::vector<Tensor> y);

 private:
  std::string name_;
  ad::Shape shape_;
  std::uint64_t seed_;
  std::size_t n_;
  Draw draw_x_;
  Draw draw_y_;
  std::optional<TruthOracle> truth_;
  std::optional<std::pair<std::vector<Tensor>, std::vector<Tensor>>> fixed_;
};

/// 2D Gaussian mixture left of the v-axis; f(u, v) = (-u, v).
/// Every X sample has u <= -margin/2 (checked on generation).
DomainTask make_reflection_task(std::uint64_t seed, std::size_t n, double margin = 0.2);

struct AffineParams {
  double scale = 0.75;
  double angle_deg = 50.0;
  double margin = 0.2;
};

/// f(p) = A (p - c_x) + c_y with A = scale * rotation(angle); not an involution.
DomainTask make_affine_task(std::uint64_t seed, std::size_t n, const AffineParams& params = {});

/// Smooth bright blob images in [-1, 1]; f(x) = -x. X images have mean pixel
/// >= margin/2.
DomainTask make_image_inversion_task(std::uint64_t seed, std::size_t n, std::size_t height, std::size_t width,
                                     double margin = 0.2);

/// Stress case only: the reflection task with X straddling the v-axis, so X
/// and Y supports overlap and a direction-agnostic translator is ill-posed.
DomainTask make_overlap_stress_task(std::uint64_t seed, std::size_t n);

/// Visits every sample exactly once per epoch in a seeded shuffled order.
class UnpairedSampler {
 public:
  UnpairedSampler(std::vector<Tensor> samples, std::uint64_t seed);

  const Tensor& next();
  std::size_t epoch() const { return epoch_; }
  std::size_t size() const { return samples_.size(); }

 private:
  void reshuffle();

  std::vector<Tensor> samples_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
  Rng rng_;
};

}  // namespace one2one::data
