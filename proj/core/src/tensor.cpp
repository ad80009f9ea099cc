#include "one2one/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "one2one/errors.hpp"

namespace one2one::ad {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor() : impl_(std::make_shared<Impl>()) {
  impl_->values.assign(1, 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : impl_(std::make_shared<Impl>()) {
  for (auto extent : shape) {
    if (extent == 0) throw DimensionError("tensor extents must be positive, got " + to_string(shape));
  }
  if (element_count(shape) != values.size()) {
    throw DimensionError("shape " + to_string(shape) + " needs " +
                         std::to_string(element_count(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  impl_->shape = std::move(shape);
  impl_->values = std::move(values);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = element_count(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + to_string(shape()));
  return impl_->values[0];
}

void Tensor::set_requires_grad(bool flag) {
  impl_->requires_grad = flag;
  if (!flag) impl_->grad.clear();
}

std::span<double> Tensor::mutable_grad() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(impl_->shape, impl_->values, false); }

Tensor Tensor::reshaped(Shape shape) const {
  if (element_count(shape) != size()) {
    throw DimensionError("cannot reshape " + to_string(this->shape()) + " to " + to_string(shape));
  }
  return Tensor(std::move(shape), impl_->values, false);
}

bool Tensor::operator==(const Tensor& other) const {
  return shape() == other.shape() && impl_->values == other.impl_->values;
}

namespace {
std::atomic<std::uint64_t> next_tape_id{1};
}

Tape::Tape(Mode mode) : mode_(mode), id_(next_tape_id.fetch_add(1)) {}

bool Tape::on_tape(const Tensor& t) const {
  const auto& impl = *t.impl_;
  return impl.has_node && impl.node.tape == id_ && impl.node.generation == generation_ &&
         impl.node.index < nodes_.size();
}

Tensor Tape::make(const char* kind, Shape shape, std::vector<double> values,
                  std::initializer_list<Tensor> inputs, BackwardFn fn) {
  Tensor out(std::move(shape), std::move(values));
  if (!recording()) return out;
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [this](const Tensor& t) { return needs_grad(t); });
  if (!any) return out;
  out.impl_->requires_grad = true;
  out.impl_->has_node = true;
  out.impl_->node = NodeRef{id_, generation_, nodes_.size()};
  nodes_.push_back(Node{kind, std::vector<Tensor>(inputs), out.size(), std::move(fn)});
  return out;
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw DimensionError("backward needs a scalar loss, got shape " + to_string(loss.shape()));
  }
  if (!on_tape(loss)) throw std::logic_error("backward: loss was not produced on this tape");

  const std::size_t root = loss.impl_->node.index;
  std::vector<std::vector<double>> grads(root + 1);
  grads[root].assign(1, 1.0);

  std::vector<std::span<double>> grad_in;
  for (std::size_t i = root + 1; i-- > 0;) {
    if (grads[i].empty()) continue;
    Node& node = nodes_[i];
    grad_in.assign(node.inputs.size(), {});
    for (std::size_t j = 0; j < node.inputs.size(); ++j) {
      Tensor& input = node.inputs[j];
      if (on_tape(input)) {
        auto& g = grads[input.impl_->node.index];
        if (g.empty()) g.assign(input.size(), 0.0);
        grad_in[j] = g;
      } else if (input.requires_grad()) {
        grad_in[j] = input.mutable_grad();
      }
    }
    node.fn(grads[i], grad_in);
    std::vector<double>().swap(grads[i]);
  }
  clear();
}

void Tape::clear() {
  nodes_.clear();
  ++generation_;
}

void backward(const Tensor& loss, Tape& tape) { tape.backward(loss); }

}  // namespace one2one::ad
