#include "kgstab/radial.hpp"

#include <cmath>
#include <numbers>

#include "kgstab/error.hpp"

namespace kgstab::radial {

RadialGrid::RadialGrid(double L_, int n) : L(L_), n_points(n) {
  if (!(L_ > 0.0) || !std::isfinite(L_)) {
    throw Error("radial.InvalidGrid", "L must be positive", ErrorKind::config);
  }
  if (n < 3) {
    throw Error("radial.InvalidGrid", "n_points must be at least 3", ErrorKind::config);
  }
  dr = L_ / (n - 1);
}

std::vector<double> RadialGrid::nodes() const {
  std::vector<double> x(n_points);
  for (int i = 0; i < n_points; ++i) x[i] = r(i);
  return x;
}

RadialState::RadialState(const RadialGrid& g)
    : grid(g), psi(g.n_points, 0.0), psi_t(g.n_points, 0.0) {}

void RadialState::validate() const {
  const auto n = static_cast<std::size_t>(grid.n_points);
  if (psi.size() != n || psi_t.size() != n) {
    throw Error("radial.InvalidState", "vector length differs from grid");
  }
  if (psi[0] != 0.0 || psi_t[0] != 0.0) {
    throw Error("radial.InvalidState", "psi must vanish at the origin");
  }
}

double trapezoid(const std::vector<double>& f, double dr) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * dr;
}

std::vector<double> d_dr(const std::vector<double>& f, double dr) {
  const std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  if (n < 3) return d;
  const double h2 = 2.0 * dr;
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / h2;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / h2;
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / h2;
  return d;
}

double h1_norm(const RadialState& s) {
  const auto& g = s.grid;
  const auto dpsi = d_dr(s.psi, g.dr);
  std::vector<double> f(g.n_points);
  for (int i = 0; i < g.n_points; ++i) {
    const double u = i == 0 ? dpsi[0] : s.psi[i] / g.r(i);
    f[i] = s.psi[i] * s.psi[i] + u * u + s.psi_t[i] * s.psi_t[i] + dpsi[i] * dpsi[i];
  }
  return std::sqrt(trapezoid(f, g.dr));
}

EnergyReport energy_e0(const RadialState& s, double c, double a, double dissipated) {
  const auto& g = s.grid;
  const auto dpsi = d_dr(s.psi, g.dr);
  std::vector<double> kin(g.n_points), grad(g.n_points), pot(g.n_points);
  for (int i = 0; i < g.n_points; ++i) {
    // r u_r = psi_r - psi/r
    const double ru_r = i == 0 ? 0.0 : dpsi[i] - s.psi[i] / g.r(i);
    kin[i] = s.psi_t[i] * s.psi_t[i];
    grad[i] = ru_r * ru_r;
    pot[i] = s.psi[i] * s.psi[i];
  }
  const double k = trapezoid(kin, g.dr);
  const double gr = trapezoid(grad, g.dr);
  const double p = trapezoid(pot, g.dr);
  const double four_pi = 4.0 * std::numbers::pi;

  EnergyReport rep;
  rep.e0 = 0.5 * four_pi * (k + gr - c * p);
  const double h1 = h1_norm(s);
  rep.h1_sq = h1 * h1;
  rep.e_tilde = 0.5 * four_pi * (k + gr + p) + dissipated / a;
  rep.trace_u = s.psi[g.n_points - 1] / g.L;
  return rep;
}

double boundary_flux(const RadialState& s) {
  const double v = s.psi_t[s.grid.n_points - 1];
  return 4.0 * std::numbers::pi * v * v;
}

ScalingMap ScalingMap::inverse() const {
  return {direction == Direction::original_to_scaled ? Direction::scaled_to_original
                                                     : Direction::original_to_scaled};
}

double ScalingMap::length(double x) const {
  return direction == Direction::original_to_scaled ? x * factor_space : x / factor_space;
}

double ScalingMap::time(double t) const {
  return direction == Direction::original_to_scaled ? t * factor_time : t / factor_time;
}

double ScalingMap::rate(double r) const {
  return direction == Direction::original_to_scaled ? r * factor_rate : r / factor_rate;
}

double convert_rate(double rate, const ScalingMap& map) {
  if (rate < 0.0) throw Error("radial.InvalidRate", "rate must be nonnegative", ErrorKind::config);
  return map.rate(rate);
}

}  // namespace kgstab::radial
