#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <vector>

#include "kgstab/greens.hpp"
#include "kgstab/spectral.hpp"

namespace kgstab::moments {

using cplx = std::complex<double>;
using spectral::Pole;

// b_k(t) = rho(t) P_{k-1}(t - 3), rho(t) = exp(-1/(1 - (t-3)^2)) on (2,4).
struct ControlBasis {
  int N = 0;
  static constexpr double t0 = 2.0;
  static constexpr double t1 = 4.0;

  double value(int k, double t) const;  // k = 1..N
  double deriv(int k, double t) const;
  Eigen::MatrixXd gram() const;
  double gram_condition() const;
};

ControlBasis build_basis(int N);

struct MomentSystem {
  std::vector<Pole> poles;     // representatives: Re >= 0
  std::vector<cplx> targets;   // one per representative
  int K = 0;                   // purely imaginary
  int J = 0;                   // all representatives
  ControlBasis basis;
  Eigen::MatrixXd matrix;      // rows x N
  Eigen::VectorXd rhs;
  Eigen::VectorXd solution;
  Eigen::MatrixXd pinv;        // N x rows least-norm inverse
  double c_beta = 0.0;         // 1->1 norm of pinv
  double residual = 0.0;

  int rows() const { return K + 2 * (J - K); }
};

struct ControlSignal {
  ControlBasis basis;
  std::vector<double> coeffs;

  double value(double t) const;
  double deriv(double t) const;
  double l1() const;
  bool zero() const;
  void write_csv(std::ostream& os, double dt, double t_end) const;
};

// Representatives (Re >= 0) of a conjugate-closed pole set.
std::vector<Pole> representatives(const std::vector<Pole>& poles);

Eigen::MatrixXd moment_matrix(const ControlBasis& basis, const std::vector<Pole>& reps);

// Targets given for the full conjugate-closed set; pairing is verified.
MomentSystem build_moment_system(const ControlBasis& basis, const std::vector<Pole>& poles,
                                 const std::vector<cplx>& targets);
MomentSystem build_moment_system(const ControlBasis& basis,
                                 const std::vector<greens::PoleTarget>& targets);

// Replace targets on an assembled system (matrix and inverse reused).
void set_targets(MomentSystem& sys, const std::vector<cplx>& rep_targets);

ControlSignal synthesize_control(MomentSystem& sys);

// int e^{-i omega t} b(t) dt over (2,4)
cplx control_moment(const ControlSignal& b, cplx omega);

int default_basis_size(int rows);

}  // namespace kgstab::moments
