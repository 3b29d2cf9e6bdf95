#pragma once

#include <vector>

namespace kgstab::radial {

// Uniform grid on [0, L] in scaled coordinates.
struct RadialGrid {
  double L = 1.0;
  int n_points = 3;
  double dr = 0.5;

  RadialGrid() = default;
  RadialGrid(double L, int n_points);

  double r(int i) const { return i == n_points - 1 ? L : i * dr; }
  std::vector<double> nodes() const;
};

// psi = r*u and psi_t at the nodes.
struct RadialState {
  RadialGrid grid;
  std::vector<double> psi;
  std::vector<double> psi_t;
  double time = 0.0;

  RadialState() = default;
  explicit RadialState(const RadialGrid& g);

  void validate() const;
};

struct EnergyReport {
  double e0 = 0.0;
  double h1_sq = 0.0;
  double e_tilde = 0.0;
  double trace_u = 0.0;
};

// Trapezoid rule on the grid.
double trapezoid(const std::vector<double>& f, double dr);
// Second-order derivative in r, one-sided at both ends.
std::vector<double> d_dr(const std::vector<double>& f, double dr);

double h1_norm(const RadialState& state);

// E0 = 1/2 int_ball (u_t^2 + |grad u|^2 - c u^2). e_tilde adds
// dissipated/a to the positive energy, where dissipated is the accumulated
// boundary integral of u_t^2 supplied by the caller.
EnergyReport energy_e0(const RadialState& state, double potential_coeff,
                       double a = 1.0, double dissipated = 0.0);

// Boundary flux of u_t^2 over the sphere r = L.
double boundary_flux(const RadialState& state);

enum class Direction { original_to_scaled, scaled_to_original };

struct ScalingMap {
  Direction direction = Direction::scaled_to_original;
  static constexpr double factor_time = 1.4142135623730951;
  static constexpr double factor_space = 1.4142135623730951;
  static constexpr double factor_rate = 0.70710678118654752;

  ScalingMap inverse() const;
  double length(double x) const;
  double time(double t) const;
  double rate(double r) const;
};

double convert_rate(double rate, const ScalingMap& map);

}  // namespace kgstab::radial
