#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "kgstab/error.hpp"
#include "kgstab/spectral.hpp"

using namespace kgstab::spectral;
using cd = std::complex<double>;

namespace {

// tan(L k) (a - L s) = a L k with k = sqrt(1 - s^2), cleared of the tangent's
// poles, bracketed on a grid and bisected.
std::vector<double> bisection_roots(double L, double a) {
  auto f = [&](double s) {
    const double k = std::sqrt(1.0 - s * s);
    return std::sin(L * k) * (a - L * s) - a * L * k * std::cos(L * k);
  };
  std::vector<double> roots;
  const int m = 20000;
  for (int i = 1; i < m - 1; ++i) {
    double lo = double(i) / m, hi = double(i + 1) / m;
    if (f(lo) * f(hi) > 0) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(lo) * f(mid) <= 0 ? hi : lo) = mid;
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

}  // namespace

TEST_CASE("imaginary poles agree with a bisection oracle on the five cases") {
  const double cases[5][2] = {{1.0, 0.5}, {2.0, 0.9}, {0.8, 0.3}, {0.5, 0.5}, {0.3, 0.6}};
  for (const auto& c : cases) {
    const auto got = find_imaginary_poles(c[0], c[1]);
    const auto want = bisection_roots(c[0], c[1]);
    REQUIRE(!got.empty());
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i] > 0.0);
      CHECK(got[i] < 1.0);
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9));
      CHECK(std::abs(characteristic_value(cd(0.0, -got[i]), c[0], c[1])) < 1e-9);
    }
  }
}

TEST_CASE("L = 1, a = 0.5 has exactly one root below a/L") {
  const auto s = find_imaginary_poles(1.0, 0.5);
  REQUIRE(s.size() == 1);
  CHECK(s[0] < 0.5);
  // sign change of the imaginary-axis function across the root
  CHECK(imaginary_axis_function(s[0] - 1e-3, 1.0, 0.5) * imaginary_axis_function(s[0] + 1e-3, 1.0, 0.5) < 0);
}

TEST_CASE("D = 2ik e^{ikL} E at random frequencies") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    const cd w(u(rng), 0.2 * u(rng));
    const cd k = bracket_root(w);
    const cd lhs = characteristic_value(w, 1.3, 0.4);
    const cd rhs = 2.0 * cd(0, 1) * k * std::exp(cd(0, 1) * k * 1.3) * characteristic_entire(w, 1.3, 0.4);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("analytic derivatives match centered differences") {
  const cd w(1.7, 0.3);
  const double h = 1e-6;
  const cd fd = (characteristic_entire(w + h, 1.0, 0.5) - characteristic_entire(w - h, 1.0, 0.5)) / (2 * h);
  CHECK(std::abs(fd - characteristic_entire_derivative(w, 1.0, 0.5)) < 1e-7);
  const cd fdd = (characteristic_value(w + h, 1.0, 0.5) - characteristic_value(w - h, 1.0, 0.5)) / (2 * h);
  CHECK(std::abs(fdd - characteristic_derivative(w, 1.0, 0.5)) < 1e-6);
}

TEST_CASE("no real poles when L differs from tan L") {
  double m = 1e300;
  for (int i = 0; i <= 40000; ++i) {
    const double al = -20.0 + 40.0 * i / 40000.0;
    m = std::min(m, std::abs(characteristic_value(cd(al, 0.0), 1.0, 0.5)));
  }
  CHECK(m > 1e-3);
  CHECK(std::abs(characteristic_value(cd(5.0, 0.0), 1.0, 0.5)) > 0.0);
}

TEST_CASE("strip search: verified, conjugate closed, consistent with the winding number") {
  const double L = 1.0, a = 0.5;
  const double bmax = asymptotic_line(L, a) + 0.3;
  const auto poles = find_poles_in_strip(L, a, bmax, 20.0);
  REQUIRE(!poles.empty());
  int inside = 0;
  for (const auto& p : poles) {
    CHECK(p.omega().imag() < bmax);
    CHECK(std::abs(characteristic_entire(p.omega(), L, a)) < 1e-9);
    const cd mirror = -std::conj(p.omega());
    const bool found = std::any_of(poles.begin(), poles.end(),
                                   [&](const Pole& q) { return std::abs(q.omega() - mirror) < 1e-8; });
    CHECK(found);
    if (std::abs(p.omega().real()) < 10.0) ++inside;
  }
  // edges placed between poles (spacing pi/L on the real axis)
  const double edge = 10.0 + 0.5;
  int in_box = 0;
  for (const auto& p : poles) in_box += std::abs(p.omega().real()) < edge;
  CHECK(winding_number(L, a, -edge, edge, -1.5, bmax) == in_box);
  CHECK(inside > 0);
}

TEST_CASE("Newton from the asymptotic seed lands on a simple pole") {
  const auto p = refine_pole(asymptotic_seed(7, 1.0, 0.5), 1.0, 0.5);
  CHECK(p.char_residual < 1e-10);
  CHECK(std::abs(p.omega().imag() - asymptotic_line(1.0, 0.5)) < 0.05);
  CHECK(std::abs(characteristic_entire_derivative(p.omega(), 1.0, 0.5)) > 1e-6);
}

TEST_CASE("degenerate L = tan L is rejected") {
  CHECK_THROWS_AS(find_imaginary_poles(4.493409457909064, 0.5), kgstab::Error);
}

TEST_CASE("eta expansion: d0 below one under the asymptotic line, error at a pole") {
  const double L = 1.0, a = 0.5;
  const auto x = eta_expansion(cd(12.0, 0.1), L, a);
  CHECK(x.d0 < 1.0);
  CHECK(std::abs(x.eta - eta_exact(cd(12.0, 0.1), L, a)) == 0.0);
  const auto p = refine_pole(asymptotic_seed(4, L, a), L, a);
  CHECK_THROWS_AS(eta_expansion(p.omega(), L, a), kgstab::Error);
}

TEST_CASE("D on the other branch differs by the factor -exp(-2ikL)") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int i = 0; i < 20; ++i) {
    const cd w(u(rng), 0.3 * u(rng));
    const cd k = bracket_root(w);
    const cd d = characteristic_value(w, 1.2, 0.6);
    const cd other = characteristic_value_other_branch(w, 1.2, 0.6);
    CHECK(std::abs(other + std::exp(-2.0 * cd(0, 1) * k * 1.2) * d) <= 1e-10 * (1.0 + std::abs(other)));
  }
}
