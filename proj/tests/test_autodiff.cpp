#include <doctest.h>

#include <cmath>
#include <random>

#include "one2one/errors.hpp"
#include "one2one/gradcheck.hpp"
#include "one2one/ops.hpp"

using namespace one2one;
using namespace one2one::ad;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, bool requires_grad = true, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(element_count(shape));
  for (auto& x : v) x = u(rng);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

// Direct nested-loop convolution, independent of the library kernel.
std::vector<double> naive_conv(const Tensor& in, const Tensor& k, std::size_t stride, std::size_t pad) {
  const auto ci = in.shape()[0], h = in.shape()[1], w = in.shape()[2];
  const auto co = k.shape()[0], ks = k.shape()[2];
  const auto oh = (h + 2 * pad - ks) / stride + 1, ow = (w + 2 * pad - ks) / stride + 1;
  std::vector<double> out(co * oh * ow, 0.0);
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (std::size_t c = 0; c < ci; ++c)
          for (std::size_t i = 0; i < ks; ++i)
            for (std::size_t j = 0; j < ks; ++j) {
              const long iy = static_cast<long>(y * stride + i) - static_cast<long>(pad);
              const long ix = static_cast<long>(x * stride + j) - static_cast<long>(pad);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) continue;
              acc += in.at((c * h + iy) * w + ix) * k.at(((o * ci + c) * ks + i) * ks + j);
            }
        out[(o * oh + y) * ow + x] = acc;
      }
  return out;
}

}  // namespace

TEST_CASE("tensor construction and shape checks") {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.rank() == 2);
  CHECK(t.size() == 6);
  CHECK(t.at(4) == 5.0);
  CHECK_THROWS_AS(Tensor({2, 0}, {}), DimensionError);
  CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), DimensionError);
  CHECK(Tensor::scalar(3.5).item() == 3.5);
  CHECK_THROWS(t.item());

  Tensor d = t.detach();
  CHECK_FALSE(d.shares_storage_with(t));
  CHECK(d == t);
  d.mutable_values()[0] = 9.0;
  CHECK(t.at(0) == 1.0);
  CHECK(t.reshaped({3, 2}).shape() == Shape{3, 2});
  CHECK_THROWS_AS(t.reshaped({4, 2}), DimensionError);
}

TEST_CASE("matmul forward and backward match hand derivation") {
  Tape tape;
  Tensor a({1, 2}, {1.0, 2.0}, true);
  Tensor b({2, 2}, {3.0, 4.0, 5.0, 6.0}, true);
  Tensor y = matmul(tape, a, b);
  CHECK(y.at(0) == 13.0);
  CHECK(y.at(1) == 16.0);
  backward(sum(tape, y), tape);
  // d/da = 1 * B^T row sums, d/dB = a^T * 1
  CHECK(a.grad()[0] == 7.0);
  CHECK(a.grad()[1] == 11.0);
  CHECK(b.grad()[0] == 1.0);
  CHECK(b.grad()[1] == 1.0);
  CHECK(b.grad()[2] == 2.0);
  CHECK(b.grad()[3] == 2.0);
  CHECK_THROWS_AS(matmul(tape, a, a), DimensionError);
}

TEST_CASE("tape records one node per primitive and clears after backward") {
  Tape tape;
  Tensor x({1, 3}, {0.1, -0.2, 0.3}, true);
  Tensor h = leaky_relu(tape, x, 0.2);
  Tensor s = tanh_act(tape, h);
  Tensor loss = mean(tape, s);
  CHECK(tape.size() == 3);
  CHECK(tape.kind(0) == "leaky_relu");
  backward(loss, tape);
  CHECK(tape.size() == 0);
  CHECK_FALSE(tape.on_tape(loss));
  CHECK_THROWS_AS(backward(loss, tape), std::logic_error);
}

TEST_CASE("inference tape and constant inputs record nothing") {
  Tape inference(Tape::Mode::inference);
  Tensor x({1, 2}, {1.0, 2.0}, true);
  mean(inference, x);
  CHECK(inference.size() == 0);

  Tape tape;
  Tensor c({1, 2}, {1.0, 2.0});
  Tensor out = add(tape, c, c);
  CHECK(tape.size() == 0);
  CHECK_FALSE(tape.on_tape(out));
}

TEST_CASE("backward requires a scalar loss") {
  Tape tape;
  Tensor x({1, 2}, {1.0, 2.0}, true);
  Tensor y = scale(tape, x, 2.0);
  CHECK_THROWS_AS(backward(y, tape), DimensionError);
}

TEST_CASE("gradients accumulate across reuse and across backward calls") {
  Tape tape;
  Tensor x({1, 2}, {1.0, -1.0}, true);
  backward(sum(tape, add(tape, x, x)), tape);
  CHECK(x.grad()[0] == 2.0);
  backward(sum(tape, x), tape);
  CHECK(x.grad()[0] == 3.0);
  x.zero_grad();
  CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("conv2d matches a direct loop") {
  std::mt19937_64 rng(3);
  for (auto [stride, pad, k] : {std::tuple{1u, 1u, 3u}, {2u, 1u, 4u}, {1u, 0u, 3u}, {2u, 0u, 2u}}) {
    Tensor in = random_tensor({2, 7, 6}, rng, false);
    Tensor ker = random_tensor({3, 2, k, k}, rng, false);
    Tape tape;
    Tensor out = conv2d(tape, in, ker, stride, pad);
    const auto expected = naive_conv(in, ker, stride, pad);
    REQUIRE(out.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(out.at(i) == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("instance norm gives zero mean and unit variance per channel") {
  std::mt19937_64 rng(5);
  Tape tape;
  Tensor x = random_tensor({2, 4, 4}, rng, false, -3.0, 5.0);
  Tensor y = instance_norm(tape, x, 1e-12);
  for (std::size_t c = 0; c < 2; ++c) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < 16; ++i) m += y.at(c * 16 + i) / 16.0;
    for (std::size_t i = 0; i < 16; ++i) v += (y.at(c * 16 + i) - m) * (y.at(c * 16 + i) - m) / 16.0;
    CHECK(m == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(instance_norm(tape, Tensor({1, 1, 1}, {1.0})), DimensionError);
}

TEST_CASE("losses match direct formulas") {
  Tape tape;
  Tensor a({1, 4}, {0.5, -1.0, 2.0, 0.0});
  Tensor b({1, 4}, {0.0, 1.0, 1.0, -0.5});
  CHECK(l1_loss(tape, a, b).item() == doctest::Approx((0.5 + 2.0 + 1.0 + 0.5) / 4.0).epsilon(1e-15));
  CHECK(mse_loss(tape, a, b).item() == doctest::Approx((0.25 + 4.0 + 1.0 + 0.25) / 4.0).epsilon(1e-15));
}

TEST_CASE("leaky relu rejects slopes outside [0, 1)") {
  Tape tape;
  Tensor x({1, 1}, {1.0});
  CHECK_THROWS(leaky_relu(tape, x, -0.1));
  CHECK_THROWS(leaky_relu(tape, x, 1.0));
}

TEST_CASE("every primitive passes a central-difference check") {
  std::mt19937_64 rng(11);
  const double tol = 1e-6;
  auto check = [&](const char* name, const ScalarFn& f, Tensor x) {
    INFO(name);
    auto r = finite_diff_check(f, x, 1e-6);
    REQUIRE(r.defined());
    CHECK(*r.max_error < tol);
  };
  Tensor m = random_tensor({3, 2}, rng, false);
  check("matmul", [&](Tape& t, const Tensor& x) { return sum(t, matmul(t, x, m)); }, random_tensor({2, 3}, rng));
  check("add", [&](Tape& t, const Tensor& x) { return sum(t, add(t, x, m)); }, random_tensor({3, 2}, rng));
  check("sub", [&](Tape& t, const Tensor& x) { return mean(t, sub(t, m, x)); }, random_tensor({3, 2}, rng));
  check("scale", [&](Tape& t, const Tensor& x) { return sum(t, scale(t, x, -1.7)); }, random_tensor({3, 2}, rng));
  check("reshape", [&](Tape& t, const Tensor& x) { return sum(t, matmul(t, reshape(t, x, {1, 6}), m.reshaped({6, 1}))); },
        random_tensor({3, 2}, rng));
  check("leaky_relu", [&](Tape& t, const Tensor& x) { return mse_loss(t, leaky_relu(t, x, 0.2), m); },
        random_tensor({3, 2}, rng));
  check("tanh", [&](Tape& t, const Tensor& x) { return mse_loss(t, tanh_act(t, x), m); }, random_tensor({3, 2}, rng));
  check("l1", [&](Tape& t, const Tensor& x) { return l1_loss(t, x, m); }, random_tensor({3, 2}, rng));
  check("mse", [&](Tape& t, const Tensor& x) { return mse_loss(t, x, m); }, random_tensor({3, 2}, rng));

  Tensor img_target = random_tensor({2, 4, 4}, rng, false);
  Tensor ker = random_tensor({2, 2, 3, 3}, rng, false);
  check("conv2d input", [&](Tape& t, const Tensor& x) { return mse_loss(t, conv2d(t, x, ker, 1, 1), img_target); },
        random_tensor({2, 4, 4}, rng));
  Tensor img = random_tensor({2, 4, 4}, rng, false);
  check("conv2d kernels", [&](Tape& t, const Tensor& k) { return mse_loss(t, conv2d(t, img, k, 1, 1), img_target); },
        random_tensor({2, 2, 3, 3}, rng));
  Tensor down_target = random_tensor({2, 2, 2}, rng, false);
  check("conv2d strided", [&](Tape& t, const Tensor& k) { return mse_loss(t, conv2d(t, img, k, 2, 1), down_target); },
        random_tensor({2, 2, 4, 4}, rng));
  check("channel bias",
        [&](Tape& t, const Tensor& b) { return mse_loss(t, add_channel_bias(t, img, b), img_target); },
        random_tensor({2}, rng));
  check("instance_norm", [&](Tape& t, const Tensor& x) { return mse_loss(t, instance_norm(t, x), img_target); },
        random_tensor({2, 4, 4}, rng));
}

TEST_CASE("gradient check over several leaves") {
  std::mt19937_64 rng(13);
  std::vector<Tensor> leaves{random_tensor({1, 3}, rng), random_tensor({3, 2}, rng), random_tensor({1, 2}, rng)};
  Tensor target = random_tensor({1, 2}, rng, false);
  auto f = [&](Tape& t) { return mse_loss(t, tanh_act(t, add(t, matmul(t, leaves[0], leaves[1]), leaves[2])), target); };
  auto r = finite_diff_check(f, leaves, 1e-6);
  REQUIRE(r.defined());
  CHECK(r.coordinates == 3 + 6 + 2);
  CHECK(*r.max_error < 1e-6);
}

TEST_CASE("gradient check contract") {
  Tensor x({1, 2}, {1.0, 2.0}, false);
  auto f = [](Tape& t, const Tensor& v) { return sum(t, v); };
  CHECK_FALSE(finite_diff_check(f, x, 1e-6).defined());
  Tensor y({1, 2}, {1.0, 2.0}, true);
  CHECK_THROWS(finite_diff_check(f, y, 1e-2));
  CHECK_THROWS(finite_diff_check(f, y, 1e-9));
}
