#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace one2one::ad {

using Shape = std::vector<std::size_t>;

/// Product of the extents; 1 for the empty (scalar) shape.
std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);

/// Handle of a node on a specific tape generation. Stale handles are ignored.
struct NodeRef {
  std::uint64_t tape = 0;
  std::uint64_t generation = 0;
  std::size_t index = 0;
};

/// Dense row-major array of doubles that can take part in reverse-mode
/// differentiation. Copies share storage; use `detach()` for a deep copy.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value);

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t size() const { return impl_->values.size(); }
  std::span<const double> values() const { return impl_->values; }
  std::span<double> mutable_values() { return impl_->values; }
  double at(std::size_t i) const { return impl_->values.at(i); }
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool flag);

  bool has_grad() const { return !impl_->grad.empty(); }
  /// Empty span when no gradient has been accumulated.
  std::span<const double> grad() const { return impl_->grad; }
  /// Zero-initialises the gradient buffer on first access.
  std::span<double> mutable_grad();
  void zero_grad();

  /// Deep copy with no gradient and no tape membership.
  Tensor detach() const;
  Tensor reshaped(Shape shape) const;
  bool shares_storage_with(const Tensor& other) const { return impl_ == other.impl_; }
  bool operator==(const Tensor& other) const;

 private:
  friend class Tape;

  struct Impl {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
    bool has_node = false;
    NodeRef node;
  };
  std::shared_ptr<Impl> impl_;
};

/// Called once per node during backward. `grad_in[i]` is empty when input `i`
/// does not need a gradient; otherwise contributions must be accumulated (+=).
using BackwardFn =
    std::function<void(std::span<const double> grad_out, std::span<const std::span<double>> grad_in)>;

/// Append-only record of primitive applications. Not shareable across threads.
class Tape {
 public:
  enum class Mode { record, inference };

  explicit Tape(Mode mode = Mode::record);
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return mode_ == Mode::record; }
  std::size_t size() const { return nodes_.size(); }
  std::string_view kind(std::size_t index) const { return nodes_.at(index).kind; }

  bool on_tape(const Tensor& t) const;
  /// True for a requires-grad leaf or any tensor produced on this tape generation.
  bool needs_grad(const Tensor& t) const { return t.requires_grad() || on_tape(t); }

  /// Wraps a freshly computed value; records a node only if recording and some
  /// input needs a gradient.
  Tensor make(const char* kind, Shape shape, std::vector<double> values,
              std::initializer_list<Tensor> inputs, BackwardFn fn);

  /// Reverse accumulation from a scalar `loss` into every reachable
  /// requires-grad leaf. Clears the tape afterwards.
  void backward(const Tensor& loss);

  /// Drops all nodes; outstanding node handles become stale.
  void clear();

 private:
  struct Node {
    const char* kind;
    std::vector<Tensor> inputs;
    std::size_t output_size;
    BackwardFn fn;
  };

  Mode mode_;
  std::uint64_t id_;
  std::uint64_t generation_ = 0;
  std::vector<Node> nodes_;
};

void backward(const Tensor& loss, Tape& tape);

}  // namespace one2one::ad
