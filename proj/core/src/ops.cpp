#include "one2one/ops.hpp"

#include <cmath>
#include <stdexcept>

#include "one2one/errors.hpp"

namespace one2one::ad {

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         to_string(t.shape()));
  }
}

template <typename F>
std::vector<double> map_values(const Tensor& x, F f) {
  auto in = x.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return out;
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul: inner dimensions differ: " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
  }
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aip * bv[p * n + j];
    }
  }
  return tape.make("matmul", {m, n}, std::move(out), {a, b},
                   [a, b, m, k, n](std::span<const double> g, std::span<const std::span<double>> gin) {
                     auto av = a.values();
                     auto bv = b.values();
                     if (!gin[0].empty()) {
                       for (std::size_t i = 0; i < m; ++i)
                         for (std::size_t p = 0; p < k; ++p) {
                           double acc = 0.0;
                           for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv[p * n + j];
                           gin[0][i * k + p] += acc;
                         }
                     }
                     if (!gin[1].empty()) {
                       for (std::size_t i = 0; i < m; ++i)
                         for (std::size_t p = 0; p < k; ++p) {
                           const double aip = av[i * k + p];
                           for (std::size_t j = 0; j < n; ++j) gin[1][p * n + j] += aip * g[i * n + j];
                         }
                     }
                   });
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return tape.make("add", a.shape(), std::move(out), {a, b},
                   [](std::span<const double> g, std::span<const std::span<double>> gin) {
                     for (auto& dst : gin)
                       if (!dst.empty())
                         for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
                   });
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return tape.make("sub", a.shape(), std::move(out), {a, b},
                   [](std::span<const double> g, std::span<const std::span<double>> gin) {
                     if (!gin[0].empty())
                       for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i];
                     if (!gin[1].empty())
                       for (std::size_t i = 0; i < g.size(); ++i) gin[1][i] -= g[i];
                   });
}

Tensor scale(Tape& tape, const Tensor& x, double factor) {
  return tape.make("scale", x.shape(), map_values(x, [factor](double v) { return v * factor; }), {x},
                   [factor](std::span<const double> g, std::span<const std::span<double>> gin) {
                     for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += factor * g[i];
                   });
}

Tensor sum(Tape& tape, const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  return tape.make("sum", {}, {total}, {x},
                   [](std::span<const double> g, std::span<const std::span<double>> gin) {
                     for (auto& d : gin[0]) d += g[0];
                   });
}

Tensor mean(Tape& tape, const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  const double n = static_cast<double>(x.size());
  return tape.make("mean", {}, {total / n}, {x},
                   [n](std::span<const double> g, std::span<const std::span<double>> gin) {
                     for (auto& d : gin[0]) d += g[0] / n;
                   });
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
  if (element_count(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  }
  std::vector<double> values(x.values().begin(), x.values().end());
  return tape.make("reshape", std::move(shape), std::move(values), {x},
                   [](std::span<const double> g, std::span<const std::span<double>> gin) {
                     for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i];
                   });
}

Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& kernels, std::size_t stride,
              std::size_t pad) {
  require_rank("conv2d input", input, 3);
  require_rank("conv2d kernels", kernels, 4);
  if (stride == 0) throw DimensionError("conv2d: stride must be >= 1");
  const std::size_t cin = input.shape()[0], h = input.shape()[1], w = input.shape()[2];
  const std::size_t cout = kernels.shape()[0], k = kernels.shape()[2];
  if (kernels.shape()[1] != cin || kernels.shape()[3] != k) {
    throw DimensionError("conv2d: kernels " + to_string(kernels.shape()) + " incompatible with input " +
                         to_string(input.shape()));
  }
  if (k > h + 2 * pad || k > w + 2 * pad) {
    throw DimensionError("conv2d: kernel " + std::to_string(k) + " larger than padded input " +
                         to_string(input.shape()) + " with pad " + std::to_string(pad));
  }
  const std::size_t oh = (h + 2 * pad - k) / stride + 1;
  const std::size_t ow = (w + 2 * pad - k) / stride + 1;

  // Visits every (output, input, kernel) triple that lands inside the unpadded input.
  auto for_each_tap = [=](auto&& body) {
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t ci = 0; ci < cin; ++ci)
        for (std::size_t ky = 0; ky < k; ++ky)
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::size_t kidx = ((co * cin + ci) * k + ky) * k + kx;
            for (std::size_t oy = 0; oy < oh; ++oy) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                        static_cast<std::ptrdiff_t>(pad);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
              const std::size_t in_row = (ci * h + static_cast<std::size_t>(iy)) * w;
              const std::size_t out_row = (co * oh + oy) * ow;
              for (std::size_t ox = 0; ox < ow; ++ox) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                          static_cast<std::ptrdiff_t>(pad);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                body(out_row + ox, in_row + static_cast<std::size_t>(ix), kidx);
              }
            }
          }
  };

  auto iv = input.values();
  auto kv = kernels.values();
  std::vector<double> out(cout * oh * ow, 0.0);
  for_each_tap([&](std::size_t o, std::size_t i, std::size_t q) { out[o] += iv[i] * kv[q]; });

  return tape.make("conv2d", {cout, oh, ow}, std::move(out), {input, kernels},
                   [input, kernels, for_each_tap](std::span<const double> g,
                                                  std::span<const std::span<double>> gin) {
                     auto iv = input.values();
                     auto kv = kernels.values();
                     if (!gin[0].empty()) {
                       auto gi = gin[0];
                       for_each_tap([&](std::size_t o, std::size_t i, std::size_t q) { gi[i] += g[o] * kv[q]; });
                     }
                     if (!gin[1].empty()) {
                       auto gk = gin[1];
                       for_each_tap([&](std::size_t o, std::size_t i, std::size_t q) { gk[q] += g[o] * iv[i]; });
                     }
                   });
}

Tensor add_channel_bias(Tape& tape, const Tensor& x, const Tensor& bias) {
  require_rank("add_channel_bias", x, 3);
  const std::size_t c = x.shape()[0];
  if (bias.size() != c) {
    throw DimensionError("add_channel_bias: bias " + to_string(bias.shape()) + " for input " +
                         to_string(x.shape()));
  }
  const std::size_t plane = x.shape()[1] * x.shape()[2];
  auto xv = x.values();
  auto bv = bias.values();
  std::vector<double> out(xv.size());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < plane; ++i) out[ch * plane + i] = xv[ch * plane + i] + bv[ch];
  return tape.make("add_channel_bias", x.shape(), std::move(out), {x, bias},
                   [c, plane](std::span<const double> g, std::span<const std::span<double>> gin) {
                     if (!gin[0].empty())
                       for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i];
                     if (!gin[1].empty())
                       for (std::size_t ch = 0; ch < c; ++ch) {
                         double acc = 0.0;
                         for (std::size_t i = 0; i < plane; ++i) acc += g[ch * plane + i];
                         gin[1][ch] += acc;
                       }
                   });
}

Tensor leaky_relu(Tape& tape, const Tensor& x, double slope) {
  if (!(slope >= 0.0 && slope < 1.0)) {
    throw std::invalid_argument("leaky_relu: slope must be in [0, 1), got " + std::to_string(slope));
  }
  return tape.make("leaky_relu", x.shape(),
                   map_values(x, [slope](double v) { return v > 0.0 ? v : slope * v; }), {x},
                   [x, slope](std::span<const double> g, std::span<const std::span<double>> gin) {
                     auto xv = x.values();
                     for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += (xv[i] > 0.0 ? 1.0 : slope) * g[i];
                   });
}

Tensor tanh_act(Tape& tape, const Tensor& x) {
  auto out = map_values(x, [](double v) { return std::tanh(v); });
  auto saved = std::make_shared<std::vector<double>>(out);
  return tape.make("tanh", x.shape(), std::move(out), {x},
                   [saved](std::span<const double> g, std::span<const std::span<double>> gin) {
                     const auto& y = *saved;
                     for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += (1.0 - y[i] * y[i]) * g[i];
                   });
}

Tensor instance_norm(Tape& tape, const Tensor& x, double eps) {
  require_rank("instance_norm", x, 3);
  if (!(eps > 0.0)) throw std::invalid_argument("instance_norm: eps must be positive");
  const std::size_t c = x.shape()[0];
  const std::size_t n = x.shape()[1] * x.shape()[2];
  if (n < 2) {
    throw DimensionError("instance_norm: spatial size " + to_string(x.shape()) +
                         " has a single element per channel");
  }
  auto xv = x.values();
  std::vector<double> out(xv.size());
  auto inv_std = std::make_shared<std::vector<double>>(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* p = xv.data() + ch * n;
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += p[i];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (p[i] - mu) * (p[i] - mu);
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[ch] = is;
    for (std::size_t i = 0; i < n; ++i) out[ch * n + i] = (p[i] - mu) * is;
  }
  auto normalized = std::make_shared<std::vector<double>>(out);
  return tape.make("instance_norm", x.shape(), std::move(out), {x},
                   [c, n, inv_std, normalized](std::span<const double> g,
                                               std::span<const std::span<double>> gin) {
                     const auto& xh = *normalized;
                     const double dn = static_cast<double>(n);
                     for (std::size_t ch = 0; ch < c; ++ch) {
                       const std::size_t off = ch * n;
                       double g_mean = 0.0, gx_mean = 0.0;
                       for (std::size_t i = 0; i < n; ++i) {
                         g_mean += g[off + i];
                         gx_mean += g[off + i] * xh[off + i];
                       }
                       g_mean /= dn;
                       gx_mean /= dn;
                       const double is = (*inv_std)[ch];
                       for (std::size_t i = 0; i < n; ++i)
                         gin[0][off + i] += is * (g[off + i] - g_mean - xh[off + i] * gx_mean);
                     }
                   });
}

Tensor l1_loss(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("l1_loss", a, b);
  auto av = a.values();
  auto bv = b.values();
  double total = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) total += std::abs(av[i] - bv[i]);
  const double n = static_cast<double>(av.size());
  return tape.make("l1_loss", {}, {total / n}, {a, b},
                   [a, b, n](std::span<const double> g, std::span<const std::span<double>> gin) {
                     auto av = a.values();
                     auto bv = b.values();
                     for (std::size_t i = 0; i < av.size(); ++i) {
                       const double d = av[i] - bv[i];
                       const double s = (d > 0.0) - (d < 0.0);
                       if (!gin[0].empty()) gin[0][i] += s * g[0] / n;
                       if (!gin[1].empty()) gin[1][i] -= s * g[0] / n;
                     }
                   });
}

Tensor mse_loss(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("mse_loss", a, b);
  auto av = a.values();
  auto bv = b.values();
  double total = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) total += (av[i] - bv[i]) * (av[i] - bv[i]);
  const double n = static_cast<double>(av.size());
  return tape.make("mse_loss", {}, {total / n}, {a, b},
                   [a, b, n](std::span<const double> g, std::span<const std::span<double>> gin) {
                     auto av = a.values();
                     auto bv = b.values();
                     for (std::size_t i = 0; i < av.size(); ++i) {
                       const double d = 2.0 * (av[i] - bv[i]) * g[0] / n;
                       if (!gin[0].empty()) gin[0][i] += d;
                       if (!gin[1].empty()) gin[1][i] -= d;
                     }
                   });
}

}  // namespace one2one::ad
