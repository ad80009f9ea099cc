#include "one2one/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "one2one/errors.hpp"
#include "one2one/ops.hpp"

namespace one2one::metrics {

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + ad::to_string(a.shape()) + " vs " +
                         ad::to_string(b.shape()));
  }
}

double l1(const Tensor& a, const Tensor& b) {
  ad::Tape tape(ad::Tape::Mode::inference);
  return ad::l1_loss(tape, a, b).item();
}

std::vector<double> gaussian_window(std::size_t size, double sigma) {
  std::vector<double> w(size * size);
  const double centre = (static_cast<double>(size) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j) {
      const double dy = static_cast<double>(i) - centre, dx = static_cast<double>(j) - centre;
      w[i * size + j] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      total += w[i * size + j];
    }
  for (auto& v : w) v /= total;
  return w;
}

// Written so that identical inputs give exactly 1.
double ssim_from_moments(double mu_a, double mu_b, double var_a, double var_b, double cov, double c1, double c2) {
  const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
  const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
  return num / den;
}

std::vector<double> concat(std::span<const Tensor> ts) {
  std::vector<double> out;
  for (const auto& t : ts) out.insert(out.end(), t.values().begin(), t.values().end());
  return out;
}

}  // namespace

double psnr(const Tensor& a, const Tensor& b, double data_range) {
  require_same_shape("psnr", a, b);
  if (!(data_range > 0.0)) throw std::invalid_argument("psnr: data_range must be positive");
  auto av = a.values();
  auto bv = b.values();
  double total = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) total += (av[i] - bv[i]) * (av[i] - bv[i]);
  const double mse = total / static_cast<double>(av.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(data_range * data_range / mse));
}

double ssim(const Tensor& a, const Tensor& b, double data_range, std::size_t window, double sigma) {
  require_same_shape("ssim", a, b);
  if (a.rank() != 2 && a.rank() != 3) throw DimensionError("ssim: expected [h x w] or [c x h x w]");
  const std::size_t channels = a.rank() == 3 ? a.shape()[0] : 1;
  const std::size_t h = a.shape()[a.rank() - 2], w = a.shape()[a.rank() - 1];
  if (window == 0 || h < window || w < window) {
    throw DimensionError("ssim: image " + ad::to_string(a.shape()) + " smaller than window " +
                         std::to_string(window));
  }
  const auto weights = gaussian_window(window, sigma);
  const double c1 = (0.01 * data_range) * (0.01 * data_range);
  const double c2 = (0.03 * data_range) * (0.03 * data_range);
  auto av = a.values();
  auto bv = b.values();

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t ch = 0; ch < channels; ++ch) {
    const double* pa = av.data() + ch * h * w;
    const double* pb = bv.data() + ch * h * w;
    for (std::size_t y = 0; y + window <= h; ++y)
      for (std::size_t x = 0; x + window <= w; ++x) {
        double mu_a = 0, mu_b = 0, saa = 0, sbb = 0, sab = 0;
        for (std::size_t i = 0; i < window; ++i)
          for (std::size_t j = 0; j < window; ++j) {
            const double wt = weights[i * window + j];
            const double va = pa[(y + i) * w + x + j], vb = pb[(y + i) * w + x + j];
            mu_a += wt * va;
            mu_b += wt * vb;
            saa += wt * va * va;
            sbb += wt * vb * vb;
            sab += wt * va * vb;
          }
        total += ssim_from_moments(mu_a, mu_b, saa - mu_a * mu_a, sbb - mu_b * mu_b, sab - mu_a * mu_b, c1, c2);
        ++count;
      }
  }
  return total / static_cast<double>(count);
}

double ssim_global(std::span<const double> a, std::span<const double> b, double data_range) {
  if (a.size() != b.size() || a.empty()) throw DimensionError("ssim_global: length mismatch or empty input");
  const double n = static_cast<double>(a.size());
  double mu_a = 0, mu_b = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mu_a += a[i] / n;
    mu_b += b[i] / n;
    saa += a[i] * a[i] / n;
    sbb += b[i] * b[i] / n;
    sab += a[i] * b[i] / n;
  }
  const double c1 = (0.01 * data_range) * (0.01 * data_range);
  const double c2 = (0.03 * data_range) * (0.03 * data_range);
  return ssim_from_moments(mu_a, mu_b, saa - mu_a * mu_a, sbb - mu_b * mu_b, sab - mu_a * mu_b, c1, c2);
}

double self_inverse_residual(const nn::Model& G, std::span<const Tensor> samples) {
  return composite_residual(G, G, samples);
}

double composite_residual(const nn::Model& first, const nn::Model& second, std::span<const Tensor> samples) {
  if (samples.empty()) throw std::invalid_argument("residual: no samples");
  double total = 0.0;
  for (const auto& z : samples) total += l1(nn::apply(second, nn::apply(first, z)), z);
  return total / static_cast<double>(samples.size());
}

double euclidean_distance(const Tensor& a, const Tensor& b) {
  require_same_shape("distance", a, b);
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += (a.at(i) - b.at(i)) * (a.at(i) - b.at(i));
  return std::sqrt(total);
}

double median_pairwise_distance(std::span<const Tensor> samples) {
  if (samples.size() < 2) throw std::invalid_argument("median_pairwise_distance: need at least 2 samples");
  std::vector<double> d;
  d.reserve(samples.size() * (samples.size() - 1) / 2);
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) d.push_back(euclidean_distance(samples[i], samples[j]));
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size() / 2;
  return d.size() % 2 == 1 ? d[m] : 0.5 * (d[m - 1] + d[m]);
}

double injectivity_score(std::span<const Tensor> inputs, std::span<const Tensor> outputs, double eps_in,
                         double eps_out) {
  if (inputs.size() < 2) throw std::invalid_argument("injectivity_score: need at least 2 samples");
  if (inputs.size() != outputs.size()) throw std::invalid_argument("injectivity_score: inputs/outputs differ in count");
  if (!(eps_out > 0.0 && eps_in > eps_out)) throw std::invalid_argument("injectivity_score: need eps_in > eps_out > 0");
  std::size_t violations = 0, pairs = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    for (std::size_t j = i + 1; j < inputs.size(); ++j) {
      ++pairs;
      if (euclidean_distance(inputs[i], inputs[j]) > eps_in && euclidean_distance(outputs[i], outputs[j]) < eps_out) {
        ++violations;
      }
    }
  return static_cast<double>(violations) / static_cast<double>(pairs);
}

double injectivity_score(const nn::Model& G, std::span<const Tensor> samples, double eps_in, double eps_out) {
  std::vector<Tensor> outputs;
  outputs.reserve(samples.size());
  for (const auto& s : samples) outputs.push_back(nn::apply(G, s));
  return injectivity_score(samples, outputs, eps_in, eps_out);
}

double bias_gap(const nn::Model& G, const data::DomainTask& task, data::Direction direction,
                std::span<const Tensor> samples) {
  const auto* truth = task.truth();
  if (truth == nullptr) {
    throw UnavailableError("bias gap unavailable: task '" + task.name() + "' has no ground-truth oracle");
  }
  if (samples.empty()) throw std::invalid_argument("bias_gap: no samples");
  double total = 0.0;
  for (const auto& s : samples) {
    const Tensor pred = nn::apply(G, s);
    const Tensor target = truth->translate(s, direction);
    total += task.is_image() ? l1(pred, target) : euclidean_distance(pred, target);
  }
  return total / static_cast<double>(samples.size());
}

MetricsReport evaluate(const gan::System& system, const data::DomainTask& task, std::size_t n_eval,
                       std::uint64_t seed) {
  const auto* truth = task.truth();
  if (truth == nullptr) {
    throw UnavailableError("evaluation unavailable: task '" + task.name() + "' has no ground-truth oracle");
  }
  if (n_eval < 2) throw std::invalid_argument("evaluate: need at least 2 held-out samples");
  const auto stream = derive_seed(seed, "held-out");
  const auto xs = task.sample_x(stream, n_eval);
  const auto ys = task.sample_y(stream, n_eval);
  const nn::Model& to_y = gan::x2y_generator(system);
  const nn::Model& to_x = gan::y2x_generator(system);

  std::vector<Tensor> fake_y, fake_x, target_y, target_x;
  for (const auto& x : xs) {
    fake_y.push_back(nn::apply(to_y, x));
    target_y.push_back(truth->to_y(x));
  }
  for (const auto& y : ys) {
    fake_x.push_back(nn::apply(to_x, y));
    target_x.push_back(truth->to_x(y));
  }

  MetricsReport r;
  constexpr double kRange = 2.0;
  if (task.is_image()) {
    const std::size_t h = task.shape()[1], w = task.shape()[2];
    const std::size_t window = std::min({kSsimWindow, h, w});
    double p_xy = 0, p_yx = 0, s_xy = 0, s_yx = 0;
    for (std::size_t i = 0; i < n_eval; ++i) {
      p_xy += psnr(fake_y[i], target_y[i], kRange);
      p_yx += psnr(fake_x[i], target_x[i], kRange);
      s_xy += ssim(fake_y[i], target_y[i], kRange, window);
      s_yx += ssim(fake_x[i], target_x[i], kRange, window);
    }
    const double n = static_cast<double>(n_eval);
    r.psnr_x2y = p_xy / n;
    r.psnr_y2x = p_yx / n;
    r.ssim_x2y = s_xy / n;
    r.ssim_y2x = s_yx / n;
  } else {
    const auto fy = concat(fake_y), ty = concat(target_y), fx = concat(fake_x), tx = concat(target_x);
    r.psnr_x2y = psnr(Tensor({fy.size()}, fy), Tensor({ty.size()}, ty), kRange);
    r.psnr_y2x = psnr(Tensor({fx.size()}, fx), Tensor({tx.size()}, tx), kRange);
    r.ssim_x2y = ssim_global(fy, ty, kRange);
    r.ssim_y2x = ssim_global(fx, tx, kRange);
  }

  if (gan::mode_of(system) == gan::Mode::one2one) {
    std::vector<Tensor> both(xs);
    both.insert(both.end(), ys.begin(), ys.end());
    r.self_inverse_residual = self_inverse_residual(to_y, both);
    r.residual_kind = "G(G(z))";
  } else {
    r.self_inverse_residual = 0.5 * (composite_residual(to_y, to_x, xs) + composite_residual(to_x, to_y, ys));
    r.residual_kind = "F(G(x))|G(F(y))";
  }

  r.eps_in = 0.1 * median_pairwise_distance(xs);
  r.eps_out = 0.01 * median_pairwise_distance(target_y);
  const double eps_in_y = 0.1 * median_pairwise_distance(ys);
  const double eps_out_y = 0.01 * median_pairwise_distance(target_x);
  r.injectivity_score = std::max(injectivity_score(xs, fake_y, r.eps_in, r.eps_out),
                                 injectivity_score(ys, fake_x, eps_in_y, eps_out_y));

  r.bias_gap_x2y = bias_gap(to_y, task, data::Direction::x2y, xs);
  r.bias_gap_y2x = bias_gap(to_x, task, data::Direction::y2x, ys);
  return r;
}

}  // namespace one2one::metrics
