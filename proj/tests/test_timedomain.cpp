#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "kgstab/error.hpp"
#include "kgstab/evolution.hpp"
#include "kgstab/stabilize.hpp"

using namespace kgstab;
using namespace kgstab::timedomain;

namespace {

// Manufactured solution psi = sin(2r) cos(1.3t) + r^2 sin t, source and
// boundary datum chosen so that it solves the forced problem exactly.
double exact(double r, double t) { return std::sin(2 * r) * std::cos(1.3 * t) + r * r * std::sin(t); }
double exact_t(double r, double t) { return -1.3 * std::sin(2 * r) * std::sin(1.3 * t) + r * r * std::cos(t); }
double exact_r(double r, double t) { return 2 * std::cos(2 * r) * std::cos(1.3 * t) + 2 * r * std::sin(t); }
double forcing(double r, double t) { return 1.31 * std::sin(2 * r) * std::cos(1.3 * t) - (2 * r * r + 2) * std::sin(t); }

double mms_error(int n) {
  const double L = 1.0, a = 0.5, T = 1.0;
  auto cfg = EvolutionConfig::make(L, n, a, 0.5, Mode::linearized, T);
  const auto& g = cfg.grid;
  auto boundary = [&](double t) { return (exact_t(L, t) + a * exact_r(L, t) - (a / L) * exact(L, t)) / L; };
  auto source = [&](double t) {
    std::vector<double> f(g.n_points);
    for (int i = 0; i < g.n_points; ++i) f[i] = forcing(g.r(i), t);
    return f;
  };
  RadialState s0(g);
  for (int i = 0; i < g.n_points; ++i) {
    s0.psi[i] = exact(g.r(i), 0.0);
    s0.psi_t[i] = exact_t(g.r(i), 0.0);
  }
  s0.psi[0] = 0.0;
  s0.psi_t[0] = 0.0;
  auto f0 = source(0.0);
  Stepper st(cfg, s0, boundary(0.0), &f0);
  const long steps = cfg.steps();
  for (long k = 0; k < steps; ++k) {
    const double t = st.time();
    const auto f = source(t);
    st.advance(boundary(t), &f);
  }
  double err = 0.0;
  for (int i = 0; i < g.n_points; ++i) err = std::max(err, std::abs(st.current()[i] - exact(g.r(i), st.time())));
  return err;
}

RadialState bump(const RadialGrid& g, double amp) {
  RadialState s(g);
  for (int i = 1; i < g.n_points; ++i) {
    const double r = g.r(i);
    s.psi[i] = amp * r * std::exp(-40.0 * (r - 0.5) * (r - 0.5));
    s.psi_t[i] = -amp * (std::exp(-40.0 * (r - 0.5) * (r - 0.5)) * (1.0 - 80.0 * r * (r - 0.5)));
  }
  return s;
}

// Positive energy plus the boundary loss, sampled every step.
double energy_drift(int n) {
  const double a = 0.5;
  auto cfg = EvolutionConfig::make(1.0, n, a, 0.5, Mode::linearized, 3.0);
  Stepper st(cfg, bump(cfg.grid, 1.0));
  double lost = 0.0, prev_flux = 0.0, e_start = 0.0, worst = 0.0;
  const long steps = cfg.steps();
  for (long k = 0; k < steps; ++k) {
    Stepper probe = st;
    probe.advance(0.0);
    const auto s = st.state_with_next(probe.current());
    const double flux = radial::boundary_flux(s);
    if (k > 0) lost += 0.5 * cfg.dt * (flux + prev_flux) / a;
    prev_flux = flux;
    const double e = radial::energy_e0(s, cfg.potential).e0 + lost;
    if (k == 0) e_start = e;
    worst = std::max(worst, std::abs(e - e_start));
    st.advance(0.0);
  }
  CHECK(lost > 0.05 * std::abs(e_start));
  return worst / std::abs(e_start);
}

}  // namespace

TEST_CASE("manufactured solution converges at second order") {
  const double e1 = mms_error(101), e2 = mms_error(201), e3 = mms_error(401);
  const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
  MESSAGE("errors " << e1 << " " << e2 << " " << e3);
  CHECK(p2 == doctest::Approx(2.0).epsilon(0.15));
  CHECK(p1 > 1.7);
  CHECK(e3 < 1e-4);
}

TEST_CASE("energy plus boundary loss is conserved without control") {
  const double d1 = energy_drift(201), d2 = energy_drift(401);
  MESSAGE("relative drift " << d1 << " " << d2);
  CHECK(d2 < 5e-3);
  CHECK(d2 < 0.5 * d1);
}

TEST_CASE("linearized evolution is linear and runs are deterministic") {
  auto cfg = EvolutionConfig::make(1.0, 201, 0.5, 0.9, Mode::linearized, 5.0);
  const auto r1 = simulate(bump(cfg.grid, 1e-3), cfg, [](double) { return 0.0; });
  const auto r2 = simulate(bump(cfg.grid, 2e-3), cfg, [](double) { return 0.0; });
  const auto r3 = simulate(bump(cfg.grid, 1e-3), cfg, [](double) { return 0.0; });
  REQUIRE(r1.records.size() == r2.records.size());
  for (std::size_t i = 0; i < r1.records.size(); ++i) {
    CHECK(r2.records[i].h1_norm == doctest::Approx(2.0 * r1.records[i].h1_norm).epsilon(1e-12));
    CHECK(r3.records[i].h1_norm == r1.records[i].h1_norm);
  }
}

TEST_CASE("nonlinear source is r N(psi / r)") {
  CHECK(nonlinearity(0.0) == 0.0);
  CHECK(nonlinearity(2.0) == doctest::Approx(10.0));
  auto cfg = EvolutionConfig::make(1.0, 11, 0.5, 0.9, Mode::nonlinear_shifted, 1.0);
  RadialState s(cfg.grid);
  for (int i = 0; i < 11; ++i) s.psi[i] = 0.2 * cfg.grid.r(i);
  Stepper st(cfg, s);
  for (int i = 1; i < 11; ++i) CHECK(st.source()[i] == doctest::Approx(cfg.grid.r(i) * nonlinearity(0.2)));
}

TEST_CASE("uncontrolled growth matches the imaginary pole") {
  auto cfg = EvolutionConfig::make(1.0, 401, 0.5, 0.9, Mode::linearized, 30.0);
  const auto run = run_instability(cfg);
  CHECK(run.s == doctest::Approx(0.17319165435703693).epsilon(1e-9));
  CHECK(run.rel_error < 0.01);
  CHECK(run.fit.r_squared > 0.999);
}

TEST_CASE("discrete modes approach the continuous poles") {
  const auto poles = spectral::find_poles_in_strip(1.0, 0.5, 0.5, 20.0);
  REQUIRE(!poles.empty());
  for (const auto& p : poles) {
    const auto m201 = discrete_mode(p, EvolutionConfig::make(1.0, 201, 0.5));
    const auto m401 = discrete_mode(p, EvolutionConfig::make(1.0, 401, 0.5));
    const double e1 = std::abs(m201.omega_h - p.omega()), e2 = std::abs(m401.omega_h - p.omega());
    CHECK(e2 < 1e-3 * (1.0 + std::abs(p.omega())));
    CHECK(e2 < 0.4 * e1);
    const double dt = 0.9 / 400;
    CHECK(std::abs(m401.mu - std::exp(std::complex<double>(0, 1) * m401.omega_h * dt)) < 1e-12);
  }
}

TEST_CASE("decay fit recovers an exact exponential") {
  std::vector<HistoryRecord> h;
  for (int i = 0; i <= 100; ++i) {
    HistoryRecord r;
    r.t = 0.1 * i;
    r.h1_norm = 3.0 * std::exp(-0.37 * r.t);
    h.push_back(r);
  }
  const auto f = measure_decay_rate(h, 2.0, 8.0);
  CHECK(f.rate == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(measure_decay_rate(h, 20.0, 30.0), Error);
}

TEST_CASE("invalid evolution settings are config errors") {
  CHECK_THROWS_AS(EvolutionConfig::make(1.0, 101, 0.5, 1.0), Error);
  CHECK_THROWS_AS(EvolutionConfig::make(1.0, 101, 1.2, 0.5), Error);
}

TEST_CASE("continuous and discrete target routes agree at second order") {
  const double beta = 0.4 * spectral::asymptotic_line(1.0, 0.5);
  std::vector<double> gaps;
  for (int n : {201, 401}) {
    const auto cfg = EvolutionConfig::make(1.0, n, 0.5, 0.9, Mode::linearized, 10.0);
    const auto init = bump(cfg.grid, 1e-3);
    const auto disc = compute_observer_targets(init, prepare_observer(cfg, beta, TargetRoute::discrete));
    const auto cont = compute_observer_targets(init, prepare_observer(cfg, beta, TargetRoute::continuous));
    REQUIRE(disc.size() == cont.size());
    double g = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < disc.size(); ++j) {
      g = std::max(g, std::abs(disc[j].r_target - cont[j].r_target));
      scale = std::max(scale, std::abs(cont[j].r_target));
    }
    MESSAGE("n = " << n << ": route difference " << g << " of " << scale);
    gaps.push_back(g / scale);
  }
  CHECK(gaps[1] < 1e-3);
  CHECK(gaps[0] / gaps[1] > 3.0);
}
