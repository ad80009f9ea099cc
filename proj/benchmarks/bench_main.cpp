#include <benchmark/benchmark.h>

#include <random>

#include "one2one/gan.hpp"
#include "one2one/ops.hpp"

using namespace one2one;
using ad::Tape;
using ad::Tensor;

namespace {

Tensor random_tensor(ad::Shape shape, std::uint64_t seed, bool requires_grad) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(ad::element_count(shape));
  for (auto& x : v) x = u(rng);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

void BM_MatmulForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Tensor a = random_tensor({n, n}, 1, true), b = random_tensor({n, n}, 2, true);
  for (auto _ : state) {
    Tape tape;
    ad::backward(ad::sum(tape, ad::matmul(tape, a, b)), tape);
    benchmark::DoNotOptimize(a.grad());
  }
}
BENCHMARK(BM_MatmulForwardBackward)->Arg(32)->Arg(64)->Arg(128);

void BM_ConvForwardBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  Tensor x = random_tensor({c, 16, 16}, 3, true), k = random_tensor({c, c, 3, 3}, 4, true);
  for (auto _ : state) {
    Tape tape;
    ad::backward(ad::sum(tape, ad::conv2d(tape, x, k, 1, 1)), tape);
    benchmark::DoNotOptimize(k.grad());
  }
}
BENCHMARK(BM_ConvForwardBackward)->Arg(1)->Arg(8)->Arg(16);

gan::SystemConfig vector_config() {
  gan::SystemConfig cfg;
  cfg.generator = {nn::NetKind::vector, {2, 32, 32, 2}, 0, 0, false};
  cfg.discriminator = {nn::NetKind::vector, {2, 32, 32, 1}, 0, 0};
  return cfg;
}

gan::SystemConfig conv_config() {
  gan::SystemConfig cfg;
  cfg.generator = {nn::NetKind::conv, {1, 8, 16, 16, 8, 1}, 16, 16, false};
  cfg.discriminator = {nn::NetKind::conv, {1, 8, 16, 1}, 16, 16};
  return cfg;
}

void BM_TrainIteration(benchmark::State& state, gan::Mode mode, bool conv) {
  auto system = gan::make_system(mode, conv ? conv_config() : vector_config());
  const ad::Shape shape = conv ? ad::Shape{1, 16, 16} : ad::Shape{1, 2};
  const Tensor x = random_tensor(shape, 5, false), y = random_tensor(shape, 6, false);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gan::train_iteration(system, x, y, 2e-4, i++));
}
BENCHMARK_CAPTURE(BM_TrainIteration, one2one_vector, gan::Mode::one2one, false);
BENCHMARK_CAPTURE(BM_TrainIteration, baseline_vector, gan::Mode::baseline, false);
BENCHMARK_CAPTURE(BM_TrainIteration, one2one_conv16, gan::Mode::one2one, true);
BENCHMARK_CAPTURE(BM_TrainIteration, baseline_conv16, gan::Mode::baseline, true);

}  // namespace

BENCHMARK_MAIN();
