#pragma once

#include <complex>
#include <vector>

namespace kgstab::spectral {

using cplx = std::complex<double>;

cplx bracket_root(cplx omega);

struct Frequency {
  cplx omega;
  cplx bracket;

  static Frequency of(cplx omega) { return {omega, bracket_root(omega)}; }
};

enum class PoleKind { purely_imaginary, complex_pair_member };

struct Pole {
  Frequency freq;
  PoleKind kind = PoleKind::complex_pair_member;
  double char_residual = 0.0;
  int newton_iters = 0;

  cplx omega() const { return freq.omega; }
};

struct EtaExpansion {
  cplx eta;
  cplx eta0;
  cplx eta1;
  double d0 = 0.0;
  cplx d1;
  double c0 = 0.0;
  cplx c1;
};

// D(omega); its zeros away from omega = +-i are the poles.
cplx characteristic_value(cplx omega, double L, double a);
cplx characteristic_derivative(cplx omega, double L, double a);

// E(omega) = (iL omega - a) sin(kL)/k + aL cos(kL), k^2 = omega^2 + 1.
// Entire in omega; D = 2ik e^{ikL} E.
cplx characteristic_entire(cplx omega, double L, double a);
cplx characteristic_entire_derivative(cplx omega, double L, double a);

// D with the other branch -<omega> substituted for <omega>.
cplx characteristic_value_other_branch(cplx omega, double L, double a);

// (1/2L) log((1+a)/(1-a))
double asymptotic_line(double L, double a);
cplx asymptotic_seed(int k, double L, double a);

// Newton on E from a seed. Throws spectral.NonConvergence.
Pole refine_pole(cplx seed, double L, double a, int max_iters = 50);

struct SearchCell {
  double re0, re1, im0, im1;
  int winding;
  int found;
};

struct PoleSearchOptions {
  double delta = -1.0;  // negative: 1e-3*pi/L
  double dedup_tol = 1e-8;
  std::vector<SearchCell>* cells = nullptr;
};

std::vector<Pole> find_poles_in_strip(double L, double a, double beta_max, double alpha_max,
                                      const PoleSearchOptions& opts = {});

// Winding number of E around the rectangle, counted with adaptive sampling.
int winding_number(double L, double a, double re0, double re1, double im0, double im1);

// g(s) = E(-is), real for real s.
double imaginary_axis_function(double s, double L, double a);
std::vector<double> find_imaginary_poles(double L, double a);

cplx eta_exact(cplx omega, double L, double a);
EtaExpansion eta_expansion(cplx omega, double L, double a);

}  // namespace kgstab::spectral
