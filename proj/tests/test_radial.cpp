#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kgstab/error.hpp"
#include "kgstab/radial.hpp"

using namespace kgstab::radial;

TEST_CASE("grid spacing and end node") {
  RadialGrid g(2.0, 201);
  CHECK(g.dr == doctest::Approx(0.01));
  CHECK(g.r(0) == 0.0);
  CHECK(g.r(200) == 2.0);
  CHECK(g.nodes().size() == 201);
}

TEST_CASE("invalid grids are config errors") {
  try {
    RadialGrid g(-1.0, 10);
    FAIL("expected an error");
  } catch (const kgstab::Error& e) {
    CHECK(e.kind() == kgstab::ErrorKind::config);
  }
  CHECK_THROWS_AS(RadialGrid(1.0, 2), kgstab::Error);
}

TEST_CASE("state must vanish at the origin") {
  RadialState s(RadialGrid(1.0, 11));
  CHECK_NOTHROW(s.validate());
  s.psi[0] = 1e-3;
  CHECK_THROWS_AS(s.validate(), kgstab::Error);
}

TEST_CASE("trapezoid and one-sided differences are exact on quadratics") {
  RadialGrid g(1.0, 101);
  std::vector<double> lin(g.n_points), quad(g.n_points);
  for (int i = 0; i < g.n_points; ++i) {
    lin[i] = 3.0 * g.r(i) + 1.0;
    quad[i] = g.r(i) * g.r(i);
  }
  CHECK(trapezoid(lin, g.dr) == doctest::Approx(2.5).epsilon(1e-14));
  const auto d = d_dr(quad, g.dr);
  for (int i = 0; i < g.n_points; ++i) CHECK(d[i] == doctest::Approx(2.0 * g.r(i)).epsilon(1e-10));
}

TEST_CASE("h1 norm and energy of psi = r^2 against closed forms") {
  // psi/r = r, psi_r = 2r, psi_r - psi/r = r
  RadialGrid g(1.0, 2001);
  RadialState s(g);
  for (int i = 0; i < g.n_points; ++i) s.psi[i] = g.r(i) * g.r(i);
  const double h1 = h1_norm(s);
  CHECK(h1 * h1 == doctest::Approx(28.0 / 15.0).epsilon(1e-6));
  const auto e = energy_e0(s, 1.0);
  CHECK(e.e0 == doctest::Approx(2.0 * std::numbers::pi * (1.0 / 3.0 - 1.0 / 5.0)).epsilon(1e-6));
  CHECK(e.trace_u == doctest::Approx(1.0));
  CHECK(e.h1_sq == doctest::Approx(28.0 / 15.0).epsilon(1e-6));
}

TEST_CASE("boundary flux uses psi_t at r = L") {
  RadialState s(RadialGrid(1.0, 11));
  s.psi_t[10] = 0.5;
  CHECK(boundary_flux(s) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("scaling map round trip") {
  const ScalingMap to_orig{};
  const ScalingMap to_scaled = to_orig.inverse();
  CHECK(to_scaled.length(to_orig.length(1.7)) == doctest::Approx(1.7));
  CHECK(to_scaled.time(to_orig.time(3.0)) == doctest::Approx(3.0));
  CHECK(to_orig.rate(to_scaled.rate(0.2)) == doctest::Approx(0.2));
  // times stretch by sqrt 2 going to scaled coordinates, rates shrink
  CHECK(to_scaled.time(1.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(to_scaled.rate(1.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(convert_rate(-1.0, to_orig), kgstab::Error);
}
