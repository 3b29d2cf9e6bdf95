#pragma once

#include <complex>
#include <string>
#include <vector>

#include "kgstab/radial.hpp"
#include "kgstab/spectral.hpp"

namespace kgstab::greens {

using cplx = std::complex<double>;
using spectral::Frequency;
using spectral::Pole;

struct GreensKernel {
  Frequency freq;
  cplx eta;
  cplx cg;
  double L = 1.0;
  double a = 0.5;

  cplx phi1(double r) const;
  cplx phi2(double r) const;
  cplx dphi1(double r) const;
  cplx dphi2(double r) const;
  // Gamma(r,s) and its r-derivative
  cplx gamma(double r, double s) const;
  cplx gamma_r(double r, double s) const;
};

GreensKernel build_kernel(cplx omega, double L, double a);

// F = r f on the grid and the boundary datum B of
// (iL omega - a) psi(L) + aL psi'(L) = L^2 B.
struct SourceData {
  std::vector<cplx> F;
  cplx B{0.0, 0.0};
  std::string origin;
};

struct PoleTarget {
  Pole pole;
  cplx l_value;
  cplx r_target;
};

// psi'' + (1 + omega^2) psi = F, psi(0) = 0, Robin row with datum B.
std::vector<cplx> resolve_elliptic(cplx omega, const SourceData& src, const radial::RadialGrid& grid,
                                   double a);

// Initial value problem with psi(0) = psi'(0) = 0 integrated to r = L.
PoleTarget pole_compatibility(const Pole& pole, const SourceData& src, const radial::RadialGrid& grid,
                              double a);

// Smooth cutoff: 0 for t <= 1, 1 for t >= 2.
double chi(double t);
double chi_t(double t);
double chi_tt(double t);

// Uniformly sampled trajectory starting at t = 0. rh[n] (optional) holds
// r*h at the nodes for snapshot n.
struct History {
  double dt = 0.0;
  std::vector<radial::RadialState> states;
  std::vector<std::vector<double>> rh;
};

SourceData fourier_source(const History& history, cplx omega);

// Adds one weighted time sample to the moments held in src.
void accumulate_fourier(SourceData& src, cplx omega, double t, double weight,
                        const radial::RadialState& s, const std::vector<double>* rh);

}  // namespace kgstab::greens
