#include "kgstab/moments.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "kgstab/error.hpp"

namespace kgstab::moments {

namespace {

constexpr cplx I{0.0, 1.0};

double rho(double x) {
  const double q = 1.0 - x * x;
  if (q <= 0.0) return 0.0;
  return std::exp(-1.0 / q);
}

// Legendre P_n(x) and P_n'(x)
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x, d0 = 0.0, d1 = 1.0;
  if (n == 0) return {1.0, 0.0};
  for (int m = 1; m < n; ++m) {
    const double p2 = ((2 * m + 1) * x * p1 - m * p0) / (m + 1);
    const double d2 = d0 + (2 * m + 1) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p1, d1};
}

template <class F>
double integrate(F f, double a, double b) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-14, &err);
  return v;
}

}  // namespace

double ControlBasis::value(int k, double t) const {
  const double x = t - 3.0;
  if (std::abs(x) >= 1.0) return 0.0;
  return rho(x) * legendre(k - 1, x).first;
}

double ControlBasis::deriv(int k, double t) const {
  const double x = t - 3.0;
  if (std::abs(x) >= 1.0) return 0.0;
  const double q = 1.0 - x * x;
  const double r = rho(x);
  const auto [p, dp] = legendre(k - 1, x);
  return r * (dp - 2.0 * x / (q * q) * p);
}

Eigen::MatrixXd ControlBasis::gram() const {
  Eigen::MatrixXd G(N, N);
  for (int i = 1; i <= N; ++i) {
    for (int j = i; j <= N; ++j) {
      G(i - 1, j - 1) = G(j - 1, i - 1) =
          integrate([&](double t) { return value(i, t) * value(j, t); }, t0, t1);
    }
  }
  return G;
}

double ControlBasis::gram_condition() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram());
  const auto& ev = es.eigenvalues();
  return ev.maxCoeff() / ev.minCoeff();
}

ControlBasis build_basis(int N) {
  if (N < 1) throw Error("moments.InvalidBasis", "basis size must be positive", ErrorKind::config);
  ControlBasis b;
  b.N = N;
  return b;
}

double ControlSignal::value(double t) const {
  double s = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] != 0.0) s += coeffs[k] * basis.value(static_cast<int>(k) + 1, t);
  }
  return s;
}

double ControlSignal::deriv(double t) const {
  double s = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] != 0.0) s += coeffs[k] * basis.deriv(static_cast<int>(k) + 1, t);
  }
  return s;
}

double ControlSignal::l1() const {
  double s = 0.0;
  for (double c : coeffs) s += std::abs(c);
  return s;
}

bool ControlSignal::zero() const {
  for (double c : coeffs) {
    if (c != 0.0) return false;
  }
  return true;
}

void ControlSignal::write_csv(std::ostream& os, double dt, double t_end) const {
  os << "t,b,b'\n" << std::setprecision(17);
  const long n = std::lround(t_end / dt);
  for (long i = 0; i <= n; ++i) {
    const double t = i * dt;
    os << t << ',' << value(t) << ',' << deriv(t) << '\n';
  }
}

std::vector<Pole> representatives(const std::vector<Pole>& poles) {
  std::vector<Pole> reps;
  for (const auto& p : poles) {
    if (p.omega().real() >= 0.0) reps.push_back(p);
  }
  return reps;
}

Eigen::MatrixXd moment_matrix(const ControlBasis& basis, const std::vector<Pole>& reps) {
  int rows = 0;
  for (const auto& p : reps) rows += p.omega().real() == 0.0 ? 1 : 2;
  if (basis.N < rows) {
    throw Error("moments.RankDeficient", "basis smaller than the number of moment constraints");
  }
  Eigen::MatrixXd A(rows, basis.N);
  int r = 0;
  for (const auto& p : reps) {
    const double al = p.omega().real(), be = p.omega().imag();
    for (int k = 1; k <= basis.N; ++k) {
      A(r, k - 1) = integrate(
          [&](double t) { return std::exp(be * t) * std::cos(al * t) * basis.value(k, t); },
          ControlBasis::t0, ControlBasis::t1);
      if (al != 0.0) {
        A(r + 1, k - 1) = integrate(
            [&](double t) { return std::exp(be * t) * std::sin(al * t) * basis.value(k, t); },
            ControlBasis::t0, ControlBasis::t1);
      }
    }
    r += al == 0.0 ? 1 : 2;
  }
  return A;
}

void set_targets(MomentSystem& sys, const std::vector<cplx>& rep_targets) {
  sys.targets = rep_targets;
  sys.rhs.resize(sys.rows());
  int r = 0;
  for (std::size_t j = 0; j < sys.poles.size(); ++j) {
    const cplx t = rep_targets[j];
    if (sys.poles[j].omega().real() == 0.0) {
      if (std::abs(t.imag()) > 1e-8 * std::max(1.0, std::abs(t))) {
        throw Error("moments.TargetMismatch", "target of an imaginary pole is not real");
      }
      sys.rhs(r++) = t.real();
    } else {
      sys.rhs(r++) = t.real();
      sys.rhs(r++) = -t.imag();
    }
  }
}

MomentSystem build_moment_system(const ControlBasis& basis, const std::vector<Pole>& poles,
                                 const std::vector<cplx>& targets) {
  if (poles.size() != targets.size()) {
    throw Error("moments.TargetMismatch", "one target per pole required");
  }
  MomentSystem sys;
  sys.basis = basis;
  std::vector<cplx> rep_t;
  for (std::size_t i = 0; i < poles.size(); ++i) {
    const cplx w = poles[i].omega();
    if (w.real() < 0.0) continue;
    sys.poles.push_back(poles[i]);
    rep_t.push_back(targets[i]);
    if (w.real() == 0.0) {
      ++sys.K;
      continue;
    }
    bool paired = false;
    for (std::size_t j = 0; j < poles.size(); ++j) {
      if (std::abs(poles[j].omega() + std::conj(w)) < 1e-8) {
        const double tol = 1e-8 * std::max(1.0, std::abs(targets[i]));
        if (std::abs(targets[j] - std::conj(targets[i])) > tol) {
          throw Error("moments.TargetMismatch", "mirror target is not the conjugate");
        }
        paired = true;
      }
    }
    if (!paired) throw Error("moments.TargetMismatch", "pole set is not conjugate closed");
  }
  sys.J = static_cast<int>(sys.poles.size());
  sys.matrix = moment_matrix(basis, sys.poles);
  const int m = sys.rows();
  if (m > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(m - 1) <= 1e-13 * sv(0)) {
      throw Error("moments.RankDeficient", "moment matrix is numerically rank deficient");
    }
    Eigen::VectorXd inv = sv.cwiseInverse();
    sys.pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    sys.c_beta = sys.pinv.cwiseAbs().colwise().sum().maxCoeff();
  } else {
    sys.pinv = Eigen::MatrixXd::Zero(basis.N, 0);
  }
  set_targets(sys, rep_t);
  return sys;
}

MomentSystem build_moment_system(const ControlBasis& basis,
                                 const std::vector<greens::PoleTarget>& targets) {
  std::vector<Pole> poles;
  std::vector<cplx> t;
  for (const auto& pt : targets) {
    poles.push_back(pt.pole);
    t.push_back(pt.r_target);
  }
  return build_moment_system(basis, poles, t);
}

ControlSignal synthesize_control(MomentSystem& sys) {
  ControlSignal b;
  b.basis = sys.basis;
  b.coeffs.assign(sys.basis.N, 0.0);
  if (sys.rows() == 0) {
    sys.solution = Eigen::VectorXd::Zero(sys.basis.N);
    sys.residual = 0.0;
    return b;
  }
  sys.solution = sys.pinv * sys.rhs;
  sys.residual = (sys.matrix * sys.solution - sys.rhs).cwiseAbs().maxCoeff();
  for (int k = 0; k < sys.basis.N; ++k) b.coeffs[k] = sys.solution(k);

  double scale = 1.0;
  for (const auto& t : sys.targets) scale = std::max(scale, std::abs(t));
  for (std::size_t j = 0; j < sys.poles.size(); ++j) {
    const cplx m = control_moment(b, sys.poles[j].omega());
    if (std::abs(m - sys.targets[j]) >= 1e-8 * scale) {
      throw Error("moments.RankDeficient", "moment verification failed; system ill-conditioned");
    }
  }
  return b;
}

cplx control_moment(const ControlSignal& b, cplx omega) {
  const double re = integrate(
      [&](double t) { return (std::exp(-I * omega * t)).real() * b.value(t); }, ControlBasis::t0,
      ControlBasis::t1);
  const double im = integrate(
      [&](double t) { return (std::exp(-I * omega * t)).imag() * b.value(t); }, ControlBasis::t0,
      ControlBasis::t1);
  return {re, im};
}

int default_basis_size(int rows) { return rows + 4; }

}  // namespace kgstab::moments
