#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "kgstab/evolution.hpp"
#include "kgstab/greens.hpp"
#include "kgstab/spectral.hpp"

using namespace kgstab;

static void BM_Characteristic(benchmark::State& state) {
  std::complex<double> w(3.7, 0.2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral::characteristic_entire(w, 1.0, 0.5));
    w += 1e-9;
  }
}
BENCHMARK(BM_Characteristic);

static void BM_PoleSearch(benchmark::State& state) {
  const double alpha_max = static_cast<double>(state.range(0));
  for (auto _ : state) {
    auto poles = spectral::find_poles_in_strip(1.0, 0.5, 0.6, alpha_max);
    benchmark::DoNotOptimize(poles.data());
  }
}
BENCHMARK(BM_PoleSearch)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

static void BM_GreensSolve(benchmark::State& state) {
  const radial::RadialGrid grid(1.0, static_cast<int>(state.range(0)));
  greens::SourceData src;
  for (int i = 0; i < grid.n_points; ++i) src.F.push_back(grid.r(i) * (1.0 - grid.r(i)));
  for (auto _ : state) {
    auto psi = greens::resolve_elliptic({2.0, -0.3}, src, grid, 0.5);
    benchmark::DoNotOptimize(psi.data());
  }
}
BENCHMARK(BM_GreensSolve)->Arg(401)->Arg(2001)->Unit(benchmark::kMicrosecond);

// Grid points advanced per second.
static void BM_StepperThroughput(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto mode = state.range(1) ? timedomain::Mode::nonlinear_shifted : timedomain::Mode::linearized;
  const auto cfg = timedomain::EvolutionConfig::make(1.0, n, 0.5, 0.9, mode);
  radial::RadialState s(cfg.grid);
  for (int i = 0; i < n; ++i) s.psi[i] = 1e-3 * cfg.grid.r(i) * (1.0 - cfg.grid.r(i));
  timedomain::Stepper st(cfg, s);
  for (auto _ : state) {
    // the uncontrolled state grows; restart before it trips the blowup guard
    if (st.step_index() == 20000) {
      state.PauseTiming();
      st = timedomain::Stepper(cfg, s);
      state.ResumeTiming();
    }
    st.advance(0.0);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_StepperThroughput)->Args({401, 0})->Args({2001, 0})->Args({2001, 1});

BENCHMARK_MAIN();
