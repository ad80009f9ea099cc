#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "one2one/tensor.hpp"

namespace one2one::nn {

enum class NetKind { vector, conv };

std::string to_string(NetKind kind);
NetKind parse_net_kind(const std::string& text);

inline constexpr double kLeakySlope = 0.2;

/// Shape-preserving translator. Samples are [1 x d] rows for the vector kind
/// and [c x h x w] images for the conv kind.
///
/// vector: `widths` = {d, hidden..., d}; leaky-relu hidden layers, tanh output.
/// conv:   `widths` = channel progression {c, ..., c}; 3x3 stride-1 convs,
///         optional instance norm on hidden layers, tanh output.
struct GeneratorSpec {
  NetKind kind = NetKind::vector;
  std::vector<std::size_t> widths;
  std::size_t height = 0;
  std::size_t width = 0;
  bool norm = true;

  bool operator==(const GeneratorSpec&) const = default;
};

/// Raw-score critic.
///
/// vector: `widths` = {d, hidden..., 1}; one score per sample.
/// conv:   `widths` = channel progression ending in 1. Every layer but the last
///         is a 4x4 stride-2 conv (halving the grid); the last is a 3x3 stride-1
///         conv producing the patch score grid. Instance norm on all hidden
///         layers except the first.
struct DiscriminatorSpec {
  NetKind kind = NetKind::vector;
  std::vector<std::size_t> widths;
  std::size_t height = 0;
  std::size_t width = 0;

  bool operator==(const DiscriminatorSpec&) const = default;
};

using ModelSpec = std::variant<GeneratorSpec, DiscriminatorSpec>;

ad::Shape input_shape(const ModelSpec& spec);
ad::Shape output_shape(const ModelSpec& spec);

/// Single-line textual form used by checkpoints; `parse_spec` inverts it.
std::string describe(const ModelSpec& spec);
ModelSpec parse_spec(const std::string& line);

struct NamedParameter {
  std::string name;
  ad::Tensor value;
};

class Model {
 public:
  Model() = default;
  Model(ModelSpec spec, std::vector<NamedParameter> params);

  const ModelSpec& spec() const { return spec_; }
  bool is_generator() const { return std::holds_alternative<GeneratorSpec>(spec_); }

  std::vector<NamedParameter>& parameters() { return params_; }
  const std::vector<NamedParameter>& parameters() const { return params_; }
  /// Tensor handles sharing storage with the parameters, in declaration order.
  std::vector<ad::Tensor> tensors() const;

  void zero_grad();
  Model clone() const;

 private:
  ModelSpec spec_;
  std::vector<NamedParameter> params_;
};

/// Weights drawn from Normal(0, 0.02), biases zero. Deterministic in `seed`.
Model build_generator(const GeneratorSpec& spec, std::uint64_t seed);
Model build_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed);

void validate(const GeneratorSpec& spec);
void validate(const DiscriminatorSpec& spec);

ad::Tensor forward(const Model& model, const ad::Tensor& x, ad::Tape& tape);

/// Convenience: forward without recording.
ad::Tensor apply(const Model& model, const ad::Tensor& x);

std::size_t param_count(const Model& model);

}  // namespace one2one::nn
