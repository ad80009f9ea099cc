#include "one2one/nn.hpp"

#include <sstream>

#include "one2one/errors.hpp"
#include "one2one/ops.hpp"
#include "one2one/rng.hpp"

namespace one2one::nn {

using ad::Shape;
using ad::Tape;
using ad::Tensor;

std::string to_string(NetKind kind) { return kind == NetKind::vector ? "vector" : "conv"; }

NetKind parse_net_kind(const std::string& text) {
  if (text == "vector") return NetKind::vector;
  if (text == "conv") return NetKind::conv;
  throw SpecError("unknown network kind '" + text + "'");
}

namespace {

constexpr std::size_t kGenKernel = 3;
constexpr std::size_t kDownKernel = 4;
constexpr std::size_t kHeadKernel = 3;

void require_positive_widths(const std::vector<std::size_t>& widths, const char* what) {
  if (widths.size() < 2) throw SpecError(std::string(what) + ": need at least input and output widths");
  for (auto w : widths)
    if (w == 0) throw SpecError(std::string(what) + ": widths must be positive");
}

std::size_t downsampled(std::size_t extent, std::size_t layers) {
  for (std::size_t i = 0; i < layers; ++i) extent = (extent + 2 - kDownKernel) / 2 + 1;
  return extent;
}

}  // namespace

void validate(const GeneratorSpec& spec) {
  require_positive_widths(spec.widths, "generator");
  if (spec.widths.front() != spec.widths.back()) {
    throw SpecError("generator input width " + std::to_string(spec.widths.front()) +
                    " differs from output width " + std::to_string(spec.widths.back()));
  }
  if (spec.kind == NetKind::conv) {
    if (spec.height == 0 || spec.width == 0) throw SpecError("conv generator needs height and width");
    if (spec.norm && spec.height * spec.width < 2) throw SpecError("instance norm needs at least 2 pixels");
  }
}

void validate(const DiscriminatorSpec& spec) {
  require_positive_widths(spec.widths, "discriminator");
  if (spec.widths.back() != 1) throw SpecError("discriminator must end in a single score channel");
  if (spec.kind == NetKind::conv) {
    if (spec.height == 0 || spec.width == 0) throw SpecError("conv discriminator needs height and width");
    const std::size_t downs = spec.widths.size() - 2;
    const std::size_t scale = std::size_t{1} << downs;
    if (spec.height % scale != 0 || spec.width % scale != 0) {
      throw SpecError("conv discriminator: " + std::to_string(downs) + " stride-2 layers need extents divisible by " +
                      std::to_string(scale));
    }
    // The last normalised layer (index downs-1, only present when downs >= 2)
    // must keep at least two pixels.
    if (downs >= 2 && (spec.height / scale) * (spec.width / scale) < 2) {
      throw SpecError("conv discriminator grid too small for instance norm");
    }
  }
}

Shape input_shape(const ModelSpec& spec) {
  return std::visit(
      [](const auto& s) -> Shape {
        if (s.kind == NetKind::vector) return {1, s.widths.front()};
        return {s.widths.front(), s.height, s.width};
      },
      spec);
}

Shape output_shape(const ModelSpec& spec) {
  if (const auto* g = std::get_if<GeneratorSpec>(&spec)) return input_shape(*g);
  const auto& d = std::get<DiscriminatorSpec>(spec);
  if (d.kind == NetKind::vector) return {1, 1};
  const std::size_t downs = d.widths.size() - 2;
  return {1, downsampled(d.height, downs), downsampled(d.width, downs)};
}

std::string describe(const ModelSpec& spec) {
  std::ostringstream out;
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        out << (std::is_same_v<S, GeneratorSpec> ? "generator" : "discriminator");
        out << " kind=" << to_string(s.kind) << " widths=";
        for (std::size_t i = 0; i < s.widths.size(); ++i) out << (i ? "," : "") << s.widths[i];
        out << " height=" << s.height << " width=" << s.width;
        if constexpr (std::is_same_v<S, GeneratorSpec>) out << " norm=" << (s.norm ? 1 : 0);
      },
      spec);
  return out.str();
}

ModelSpec parse_spec(const std::string& line) {
  std::istringstream in(line);
  std::string role;
  in >> role;
  if (role != "generator" && role != "discriminator") throw SpecError("unknown model role '" + role + "'");
  NetKind kind = NetKind::vector;
  std::vector<std::size_t> widths;
  std::size_t height = 0, width = 0;
  bool norm = true;
  std::string field;
  while (in >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw SpecError("malformed spec field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    try {
      if (key == "kind") {
        kind = parse_net_kind(value);
      } else if (key == "widths") {
        std::istringstream ws(value);
        std::string item;
        while (std::getline(ws, item, ',')) widths.push_back(std::stoul(item));
      } else if (key == "height") {
        height = std::stoul(value);
      } else if (key == "width") {
        width = std::stoul(value);
      } else if (key == "norm") {
        norm = value == "1";
      } else {
        throw SpecError("unknown spec field '" + key + "'");
      }
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const SpecError*>(&e)) throw;
      throw SpecError("bad value for spec field '" + key + "': " + value);
    }
  }
  if (role == "generator") return GeneratorSpec{kind, widths, height, width, norm};
  return DiscriminatorSpec{kind, widths, height, width};
}

Model::Model(ModelSpec spec, std::vector<NamedParameter> params)
    : spec_(std::move(spec)), params_(std::move(params)) {}

std::vector<Tensor> Model::tensors() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.value);
  return out;
}

void Model::zero_grad() {
  for (auto& p : params_) p.value.zero_grad();
}

Model Model::clone() const {
  std::vector<NamedParameter> copy;
  copy.reserve(params_.size());
  for (const auto& p : params_) {
    Tensor t = p.value.detach();
    t.set_requires_grad(true);
    copy.push_back({p.name, t});
  }
  return Model(spec_, std::move(copy));
}

namespace {

Tensor normal_tensor(Shape shape, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 0.02);
  std::vector<double> values(ad::element_count(shape));
  for (auto& v : values) v = dist(rng);
  return Tensor(std::move(shape), std::move(values), true);
}

struct LayerShapes {
  Shape weight;
  Shape bias;
};

std::vector<LayerShapes> layer_shapes(const ModelSpec& spec) {
  std::vector<LayerShapes> out;
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        for (std::size_t i = 0; i + 1 < s.widths.size(); ++i) {
          const std::size_t in = s.widths[i], o = s.widths[i + 1];
          if (s.kind == NetKind::vector) {
            out.push_back({{in, o}, {1, o}});
          } else {
            std::size_t k = kGenKernel;
            if constexpr (std::is_same_v<S, DiscriminatorSpec>) k = (i + 2 < s.widths.size()) ? kDownKernel : kHeadKernel;
            out.push_back({{o, in, k, k}, {o}});
          }
        }
      },
      spec);
  return out;
}

Model build(ModelSpec spec, std::uint64_t seed) {
  Rng rng = make_rng(seed, "init");
  std::vector<NamedParameter> params;
  const auto shapes = layer_shapes(spec);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i);
    params.push_back({prefix + ".weight", normal_tensor(shapes[i].weight, rng)});
    params.push_back({prefix + ".bias", Tensor::zeros(shapes[i].bias, true)});
  }
  return Model(std::move(spec), std::move(params));
}

}  // namespace

Model build_generator(const GeneratorSpec& spec, std::uint64_t seed) {
  validate(spec);
  return build(spec, seed);
}

Model build_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed) {
  validate(spec);
  return build(spec, seed);
}

Tensor forward(const Model& model, const Tensor& x, Tape& tape) {
  const auto expected = input_shape(model.spec());
  if (x.shape() != expected) {
    throw DimensionError("model expects input " + ad::to_string(expected) + ", got " + ad::to_string(x.shape()));
  }
  const auto& params = model.parameters();
  const std::size_t layers = params.size() / 2;
  const bool generator = model.is_generator();
  const auto kind = std::visit([](const auto& s) { return s.kind; }, model.spec());
  const bool gen_norm = generator && std::get<GeneratorSpec>(model.spec()).norm;

  Tensor h = x;
  for (std::size_t i = 0; i < layers; ++i) {
    const Tensor& w = params[2 * i].value;
    const Tensor& b = params[2 * i + 1].value;
    const bool last = i + 1 == layers;
    if (kind == NetKind::vector) {
      h = ad::add(tape, ad::matmul(tape, h, w), b);
    } else {
      std::size_t stride = 1, pad = 1;
      if (!generator && !last) stride = 2;
      h = ad::add_channel_bias(tape, ad::conv2d(tape, h, w, stride, pad), b);
      const bool norm = !last && (generator ? gen_norm : i > 0);
      if (norm) h = ad::instance_norm(tape, h);
    }
    if (!last) {
      h = ad::leaky_relu(tape, h, kLeakySlope);
    } else if (generator) {
      h = ad::tanh_act(tape, h);
    }
  }
  return h;
}

Tensor apply(const Model& model, const Tensor& x) {
  Tape tape(Tape::Mode::inference);
  return forward(model, x, tape);
}

std::size_t param_count(const Model& model) {
  std::size_t total = 0;
  for (const auto& p : model.parameters()) total += p.value.size();
  return total;
}

}  // namespace one2one::nn
