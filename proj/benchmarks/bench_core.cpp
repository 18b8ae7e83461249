#include <benchmark/benchmark.h>

#include "gridcast/data.hpp"
#include "gridcast/s2s.hpp"
#include "gridcast/train.hpp"

using namespace gridcast;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, SeededRng& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.uniform(-1, 1);
  return m;
}

void BM_matmul(benchmark::State& state) {
  const std::size_t n = state.range(0);
  SeededRng rng(1);
  const Matrix a = random_matrix(n, n, rng);
  const Matrix b = random_matrix(n, n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matmul(a, b));
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_matmul)->Arg(16)->Arg(64)->Arg(128);

void BM_cell_forward(benchmark::State& state) {
  const std::size_t h = state.range(0);
  SeededRng rng(2);
  const CellParams p = CellParams::init(4, h, 0.08, rng);
  const Matrix input = random_matrix(1, 4, rng);
  CellState prev = CellState::zeros(h);
  for (auto _ : state) {
    auto [next, cache] = cell_forward(input, prev, p, CellVariant::standard);
    benchmark::DoNotOptimize(cache);
  }
}
BENCHMARK(BM_cell_forward)->Arg(10)->Arg(50)->Arg(100);

void BM_bptt_window(benchmark::State& state) {
  const std::size_t h = state.range(0);
  SeededRng rng(3);
  const StackParams model = StackParams::init(4, 2, h, 0.08, rng);
  std::vector<Matrix> inputs;
  std::vector<double> targets;
  for (int t = 0; t < 50; ++t) {
    inputs.push_back(random_matrix(1, 4, rng));
    targets.push_back(rng.uniform(-1, 1));
  }
  const DropoutSpec no_dropout{0.0, false};
  SeededRng step_rng(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bptt_window(model, inputs, targets, no_dropout, step_rng));
  }
}
BENCHMARK(BM_bptt_window)->Arg(10)->Arg(50);

void BM_s2s_block(benchmark::State& state) {
  const std::size_t h = state.range(0);
  SeededRng rng(4);
  const S2SParams model = S2SParams::init(2, h, 0.08, rng);
  std::vector<Matrix> enc_in, dec_in;
  std::vector<double> targets;
  for (int t = 0; t < 60; ++t) enc_in.push_back(random_matrix(1, 4, rng));
  for (int t = 0; t < 60; ++t) {
    dec_in.push_back(random_matrix(1, 3, rng));
    targets.push_back(rng.uniform(-1, 1));
  }
  const DropoutSpec no_dropout{0.0, false};
  SeededRng step_rng(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        s2s_block_gradients(model, enc_in, dec_in, targets, no_dropout, step_rng));
  }
}
BENCHMARK(BM_s2s_block)->Arg(10)->Arg(50);

void BM_adam_step(benchmark::State& state) {
  SeededRng rng(5);
  StackParams model = StackParams::init(4, 2, 50, 0.08, rng);
  auto params = param_tensors(model);
  AdamState adam = AdamState::init_for(param_tensors(std::as_const(model)));
  GradSet g = GradSet::zeros_like(params);
  for (Matrix& t : g.tensors)
    for (double& v : t.values()) v = rng.uniform(-1, 1);
  TrainConfig cfg;
  for (auto _ : state) {
    adam_step(params, adam, g, cfg);
  }
}
BENCHMARK(BM_adam_step);

void BM_resample_hourly(benchmark::State& state) {
  LoadSeries minutes;
  minutes.resolution = Resolution::minute;
  minutes.start = make_timestamp(2007, 1, 1);
  SeededRng rng(6);
  const std::size_t n = 60 * 24 * 30;  // one month of minutes
  for (std::size_t i = 0; i < n; ++i) {
    minutes.values_kw.push_back(rng.uniform(0.0, 5.0));
    minutes.valid.push_back(rng.next_unit() < 0.99 ? 1 : 0);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(resample_hourly(minutes));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_resample_hourly);

}  // namespace

BENCHMARK_MAIN();
