#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "one2one/errors.hpp"
#include "one2one/io.hpp"
#include "one2one/metrics.hpp"

using namespace one2one;
using namespace one2one::metrics;
using ad::Tensor;

namespace {

Tensor random_image(std::mt19937_64& rng, std::size_t h, std::size_t w) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(h * w);
  for (auto& x : v) x = u(rng);
  return Tensor({1, h, w}, std::move(v));
}

// Two-pass SSIM over every valid window, written independently of the library
// (centred second moments instead of E[x^2] - mu^2).
double ssim_oracle(const Tensor& a, const Tensor& b, double range, std::size_t win, double sigma) {
  const auto h = a.shape()[1], w = a.shape()[2];
  std::vector<double> g(win * win);
  double gs = 0;
  const double c = (win - 1) / 2.0;
  for (std::size_t i = 0; i < win; ++i)
    for (std::size_t j = 0; j < win; ++j) gs += g[i * win + j] = std::exp(-((i - c) * (i - c) + (j - c) * (j - c)) / (2 * sigma * sigma));
  for (auto& v : g) v /= gs;
  const double c1 = std::pow(0.01 * range, 2), c2 = std::pow(0.03 * range, 2);
  double total = 0;
  int count = 0;
  for (std::size_t y = 0; y + win <= h; ++y)
    for (std::size_t x = 0; x + win <= w; ++x) {
      double ma = 0, mb = 0;
      for (std::size_t i = 0; i < win; ++i)
        for (std::size_t j = 0; j < win; ++j) {
          ma += g[i * win + j] * a.at((y + i) * w + x + j);
          mb += g[i * win + j] * b.at((y + i) * w + x + j);
        }
      double va = 0, vb = 0, cov = 0;
      for (std::size_t i = 0; i < win; ++i)
        for (std::size_t j = 0; j < win; ++j) {
          const double da = a.at((y + i) * w + x + j) - ma, db = b.at((y + i) * w + x + j) - mb;
          va += g[i * win + j] * da * da;
          vb += g[i * win + j] * db * db;
          cov += g[i * win + j] * da * db;
        }
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return total / count;
}

std::size_t brute_force_violations(const std::vector<Tensor>& in, const std::vector<Tensor>& out, double eps_in,
                                   double eps_out) {
  std::size_t v = 0;
  for (std::size_t i = 0; i < in.size(); ++i)
    for (std::size_t j = 0; j < in.size(); ++j) {
      if (i >= j) continue;
      double din = 0, dout = 0;
      for (std::size_t k = 0; k < in[i].size(); ++k) din += std::pow(in[i].at(k) - in[j].at(k), 2);
      for (std::size_t k = 0; k < out[i].size(); ++k) dout += std::pow(out[i].at(k) - out[j].at(k), 2);
      if (std::sqrt(din) > eps_in && std::sqrt(dout) < eps_out) ++v;
    }
  return v;
}

}  // namespace

TEST_CASE("psnr") {
  Tensor a = Tensor::zeros({1, 4});
  CHECK(psnr(a, a, 2.0) == kPsnrCap);
  Tensor b = Tensor::full({1, 4}, 0.1);
  CHECK(psnr(a, b, 2.0) == doctest::Approx(10.0 * std::log10(4.0 / 0.01)).epsilon(1e-12));
  CHECK(psnr(a, Tensor::full({1, 4}, 1e-9), 2.0) == kPsnrCap);
  CHECK_THROWS_AS(psnr(a, Tensor::zeros({1, 3}), 2.0), DimensionError);
}

TEST_CASE("ssim of an image with itself is exactly one") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5; ++i) {
    Tensor a = random_image(rng, 16, 16);
    CHECK(ssim(a, a, 2.0) == 1.0);
  }
}

TEST_CASE("ssim matches a two-pass oracle") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5; ++i) {
    Tensor a = random_image(rng, 12, 10), b = random_image(rng, 12, 10);
    CHECK(ssim(a, b, 2.0) == doctest::Approx(ssim_oracle(a, b, 2.0, 7, 1.5)).epsilon(1e-10));
    CHECK(ssim(a, b, 2.0, 3, 1.0) == doctest::Approx(ssim_oracle(a, b, 2.0, 3, 1.0)).epsilon(1e-10));
  }
}

TEST_CASE("ssim of constant images one data range apart is far below one half") {
  Tensor a = Tensor::full({1, 16, 16}, -1.0), b = Tensor::full({1, 16, 16}, 1.0);
  const double c1 = 0.02 * 0.02;
  // constant windows: variance terms cancel, leaving the luminance term
  const double expected = (2.0 * -1.0 * 1.0 + c1) / (1.0 + 1.0 + c1);
  CHECK(ssim(a, b, 2.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ssim(a, b, 2.0) < 0.5);
  CHECK_THROWS_AS(ssim(Tensor::zeros({1, 5, 5}), Tensor::zeros({1, 5, 5}), 2.0), DimensionError);
}

TEST_CASE("global ssim") {
  std::vector<double> a{0.1, -0.5, 0.3, 0.9}, b{0.2, -0.4, 0.1, 0.7};
  CHECK(ssim_global(a, a, 2.0) == 1.0);
  double ma = 0, mb = 0;
  for (int i = 0; i < 4; ++i) {
    ma += a[i] / 4;
    mb += b[i] / 4;
  }
  double va = 0, vb = 0, cov = 0;
  for (int i = 0; i < 4; ++i) {
    va += (a[i] - ma) * (a[i] - ma) / 4;
    vb += (b[i] - mb) * (b[i] - mb) / 4;
    cov += (a[i] - ma) * (b[i] - mb) / 4;
  }
  const double c1 = 0.0004, c2 = 0.0036;
  const double expected = ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  CHECK(ssim_global(a, b, 2.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("injectivity score against a brute-force pair scan") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Tensor> in, out;
  for (int i = 0; i < 60; ++i) {
    in.push_back(Tensor({1, 2}, {u(rng), u(rng)}));
    // Collapse the first coordinate onto a coarse grid so some pairs merge.
    out.push_back(Tensor({1, 2}, {std::round(in.back().at(0) * 2.0) / 2.0, 0.0}));
  }
  const double eps_in = 0.1, eps_out = 0.01;
  const double pairs = 60.0 * 59.0 / 2.0;
  const auto expected = brute_force_violations(in, out, eps_in, eps_out);
  CHECK(expected > 0);
  CHECK(injectivity_score(in, out, eps_in, eps_out) == static_cast<double>(expected) / pairs);
  CHECK(injectivity_score(in, in, eps_in, eps_out) == 0.0);
  std::vector<Tensor> same(60, Tensor({1, 2}, {0.0, 0.0}));
  CHECK(injectivity_score(in, same, eps_in, eps_out) ==
        static_cast<double>(brute_force_violations(in, same, eps_in, eps_out)) / pairs);
  CHECK_THROWS(injectivity_score(in, out, 0.01, 0.1));
}

TEST_CASE("median pairwise distance") {
  std::vector<Tensor> pts{Tensor({1, 1}, {0.0}), Tensor({1, 1}, {1.0}), Tensor({1, 1}, {3.0})};
  // distances 1, 3, 2
  CHECK(median_pairwise_distance(pts) == 2.0);
  pts.push_back(Tensor({1, 1}, {7.0}));
  // distances 1, 3, 7, 2, 6, 4
  CHECK(median_pairwise_distance(pts) == 3.5);
}

TEST_CASE("residuals and bias gap against direct recomputation") {
  const auto task = data::make_reflection_task(1, 200);
  auto G = nn::build_generator({nn::NetKind::vector, {2, 8, 2}, 0, 0, true}, 3);
  auto F = nn::build_generator({nn::NetKind::vector, {2, 8, 2}, 0, 0, true}, 4);
  for (auto* m : {&G, &F})
    for (auto& p : m->parameters())
      for (auto& v : p.value.mutable_values()) v *= 40.0;
  const auto xs = task.sample_x(1, 20);
  double res = 0, comp = 0, gap = 0;
  for (const auto& x : xs) {
    const Tensor gx = nn::apply(G, x), ggx = nn::apply(G, gx), fgx = nn::apply(F, gx);
    res += (std::abs(ggx.at(0) - x.at(0)) + std::abs(ggx.at(1) - x.at(1))) / 2.0 / 20.0;
    comp += (std::abs(fgx.at(0) - x.at(0)) + std::abs(fgx.at(1) - x.at(1))) / 2.0 / 20.0;
    const Tensor t = task.truth()->to_y(x);
    gap += std::hypot(gx.at(0) - t.at(0), gx.at(1) - t.at(1)) / 20.0;
  }
  CHECK(self_inverse_residual(G, xs) == doctest::Approx(res).epsilon(1e-12));
  CHECK(composite_residual(G, F, xs) == doctest::Approx(comp).epsilon(1e-12));
  CHECK(bias_gap(G, task, data::Direction::x2y, xs) == doctest::Approx(gap).epsilon(1e-12));
}

TEST_CASE("evaluate: deterministic, finite, labelled by mode") {
  const auto task = data::make_reflection_task(1, 200);
  gan::SystemConfig cfg;
  cfg.generator = {nn::NetKind::vector, {2, 8, 2}, 0, 0, true};
  cfg.discriminator = {nn::NetKind::vector, {2, 8, 1}, 0, 0};
  const auto one = gan::make_system(gan::Mode::one2one, cfg);
  const auto two = gan::make_system(gan::Mode::baseline, cfg);
  const auto r1 = evaluate(one, task, 50, 5);
  CHECK(r1 == evaluate(one, task, 50, 5));
  CHECK_FALSE(r1 == evaluate(one, task, 50, 6));
  for (double v : {r1.psnr_x2y, r1.psnr_y2x, r1.ssim_x2y, r1.ssim_y2x, r1.self_inverse_residual,
                   r1.injectivity_score, r1.bias_gap_x2y, r1.bias_gap_y2x}) {
    CHECK(std::isfinite(v));
  }
  CHECK(r1.residual_kind == "G(G(z))");
  const auto r2 = evaluate(two, task, 50, 5);
  CHECK(r2.residual_kind == "F(G(x))|G(F(y))");
  // An untrained generator outputs values near zero: the bias gap is about the distance to the targets.
  CHECK(r2.bias_gap_x2y > 0.3);
  CHECK(r1.eps_out == doctest::Approx(r1.eps_in / 10.0).epsilon(1e-12));  // reflection preserves distances
}

TEST_CASE("evaluation uses samples disjoint from the training stream") {
  const auto task = data::make_reflection_task(1, 200);
  const auto train = task.training_data();
  const auto held = task.sample_x(derive_seed(1, "held-out"), 200);
  for (const auto& h : held) {
    CHECK(std::none_of(train.x.begin(), train.x.end(), [&](const Tensor& t) { return t == h; }));
  }
}

TEST_CASE("metrics without a ground truth are unavailable") {
  const auto dir = std::filesystem::temp_directory_path() / "one2one_test_metrics";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "x.csv") << "-0.5,0\n-0.4,0.1\n";
    std::ofstream(dir / "y.csv") << "0.5,0\n0.4,0.1\n";
    std::ofstream(dir / "m.txt") << "kind = points\nshape = 2\nx = x.csv\ny = y.csv\n";
  }
  const auto task = io::load_manifest_task(dir / "m.txt", 1);
  gan::SystemConfig cfg;
  cfg.generator = {nn::NetKind::vector, {2, 4, 2}, 0, 0, true};
  cfg.discriminator = {nn::NetKind::vector, {2, 4, 1}, 0, 0};
  const auto sys = gan::make_system(gan::Mode::one2one, cfg);
  CHECK_THROWS_AS(evaluate(sys, task, 10, 1), UnavailableError);
  CHECK_THROWS_AS(bias_gap(gan::x2y_generator(sys), task, data::Direction::x2y, task.training_data().x),
                  UnavailableError);
}
