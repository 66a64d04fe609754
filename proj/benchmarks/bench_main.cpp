#include <benchmark/benchmark.h>

#include "homog/generator.hpp"
#include "homog/simulate.hpp"
#include "homog/verify.hpp"

using namespace homog;

namespace {

ModelSpec su18_model() {
  ModelSpec m;
  m.d = 1;
  m.alpha = 1.5;
  m.J = LevyDensity::one_dim(1.5, 1.0, 1.0);
  auto one = PeriodicField::constant(1, {1.0});
  auto u_factor = PeriodicField::fourier(
      1, {{FourierTerm{{0}, 1.0, 0.0}, FourierTerm{{1}, 0.0, 0.5}}});
  m.kernel = JumpKernel::product(1, one, u_factor, one);
  return m;
}

void BM_eps_path(benchmark::State& state) {
  auto model = su18_model();
  SimOptions so;
  so.T = 1.0;
  so.delta = 0.02;
  Simulator sim = Simulator::eps_process(model, 0.25, so);
  std::vector<double> x0{0.0};
  struct Nop : PathObserver {
  } nop;
  std::uint64_t p = 0;
  for (auto _ : state) {
    Rng rng(derive_seed(1, "bench", p++));
    sim.run(rng, x0, nop);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() *
                                                    sim.proposal_rate() * so.T));
}
BENCHMARK(BM_eps_path);

void BM_cell_path_with_drift(benchmark::State& state) {
  auto model = su18_model();
  model.b = PeriodicField::fourier(1, {{FourierTerm{{1}, 0.0, 0.5}}});
  SimOptions so;
  so.T = 1.0;
  so.delta = 0.05;
  so.small_jump_diffusion = true;
  Simulator sim = Simulator::cell_process(model, so);
  std::vector<double> x0{0.0};
  struct Nop : PathObserver {
  } nop;
  std::uint64_t p = 0;
  for (auto _ : state) {
    Rng rng(derive_seed(2, "bench", p++));
    sim.run(rng, x0, nop);
  }
}
BENCHMARK(BM_cell_path_with_drift);

void BM_apply_generator(benchmark::State& state) {
  auto model = su18_model();
  auto f = PeriodicField::fourier(1, {{FourierTerm{{1}, 0.0, 1.0}}});
  std::vector<double> x{0.37};
  for (auto _ : state) {
    auto gv = apply_cell_generator(model, f, x);
    benchmark::DoNotOptimize(gv.value);
  }
}
BENCHMARK(BM_apply_generator);

void BM_ecf(benchmark::State& state) {
  Rng rng(7);
  std::vector<std::vector<double>> samples(100000, std::vector<double>(1));
  for (auto& s : samples) s[0] = rng.uniform() * 10.0 - 5.0;
  auto grid = make_xi_grid(1, 17, 5.0);
  for (auto _ : state) {
    auto res = empirical_char_fn(samples, grid);
    benchmark::DoNotOptimize(res.points.front().value);
  }
}
BENCHMARK(BM_ecf);

}  // namespace

BENCHMARK_MAIN();
