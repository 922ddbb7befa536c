// Serial vs OpenMP cost kernel over theta-grid cells.

#include <benchmark/benchmark.h>

#include <cmath>

#include "gsid/estimator.hpp"
#include "gsid/kernels.hpp"

using namespace gsid;

namespace {

struct Fixture {
  SystemSpec spec{PowerBasis{1, 2}, Box({-1, -1}, {1, 1})};
  ResidualLog log;
  GridSpec grid;

  explicit Fixture(std::int64_t t) {
    const auto tr = simulate(spec, NoiseSpec(Gaussian{0.1}), std::vector{0.4, -0.3}, InputPolicy::sine_sweep(0.3, 11.0),
                             {}, t, 1);
    EstimatorConfig cfg;
    cfg.schedule = EvaluationSchedule::geometric(1e9, 1);
    GsEstimator est(spec, cfg, kInf);
    while (est.state().t < tr.length()) est.advance(tr);
    log = est.state().residual_log;
    grid = build_grid(spec.theta_box(), std::pow(static_cast<double>(t), -cfg.theta_side_exponent()));
  }
};

void BM_CostSerial(benchmark::State& state) {
  const Fixture f(state.range(0));
  std::vector<double> out(f.grid.count());
  for (auto _ : state) {
    cost_serial(f.spec, f.grid, f.log, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["cells"] = static_cast<double>(f.grid.count());
}

void BM_CostParallel(benchmark::State& state) {
  const Fixture f(state.range(0));
  std::vector<double> out(f.grid.count());
  for (auto _ : state) {
    cost_parallel(f.spec, f.grid, f.log, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["cells"] = static_cast<double>(f.grid.count());
}

}  // namespace

BENCHMARK(BM_CostSerial)->Arg(1024)->Arg(8192)->Arg(65536)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CostParallel)->Arg(1024)->Arg(8192)->Arg(65536)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
