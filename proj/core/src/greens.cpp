#include "kgstab/greens.hpp"

#include <cmath>

#include "kgstab/error.hpp"

namespace kgstab::greens {

namespace {

constexpr cplx I{0.0, 1.0};

// Cumulative integral from node 0 to node i: trapezoid with the leading
// Euler-Maclaurin end correction.
std::vector<cplx> cumulative(const std::vector<cplx>& f, double h) {
  const std::size_t n = f.size();
  std::vector<cplx> c(n, 0.0);
  cplx t = 0.0;
  const cplx left = n >= 3 ? -3.0 * f[0] + 4.0 * f[1] - f[2] : cplx(0.0);
  for (std::size_t i = 1; i < n; ++i) {
    t += 0.5 * h * (f[i - 1] + f[i]);
    c[i] = t;
    if (i >= 2) c[i] -= h / 24.0 * ((3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) - left);
  }
  return c;
}

}  // namespace

cplx GreensKernel::phi1(double r) const { return I * std::sin(freq.bracket * r); }
cplx GreensKernel::phi2(double r) const {
  return I * std::sin(freq.bracket * r) + eta * std::cos(freq.bracket * r);
}
cplx GreensKernel::dphi1(double r) const {
  const cplx k = freq.bracket;
  return I * k * std::cos(k * r);
}
cplx GreensKernel::dphi2(double r) const {
  const cplx k = freq.bracket;
  return I * k * std::cos(k * r) - eta * k * std::sin(k * r);
}
cplx GreensKernel::gamma(double r, double s) const {
  return r <= s ? phi1(r) * phi2(s) / cg : phi1(s) * phi2(r) / cg;
}
cplx GreensKernel::gamma_r(double r, double s) const {
  return r < s ? dphi1(r) * phi2(s) / cg : phi1(s) * dphi2(r) / cg;
}

GreensKernel build_kernel(cplx omega, double L, double a) {
  GreensKernel g;
  g.freq = Frequency::of(omega);
  g.L = L;
  g.a = a;
  if (std::abs(g.freq.bracket) < 1e-10) {
    throw Error("greens.Degenerate", "bracket root vanishes at omega = +-i");
  }
  g.eta = spectral::eta_exact(omega, L, a);
  if (!(std::abs(g.eta) > 1e-12)) throw Error("greens.AtPole", "omega is a pole");
  g.cg = -I * g.freq.bracket * g.eta;
  return g;
}

std::vector<cplx> resolve_elliptic(cplx omega, const SourceData& src, const radial::RadialGrid& grid,
                                   double a) {
  const GreensKernel K = build_kernel(omega, grid.L, a);
  const int n = grid.n_points;
  const double L = grid.L;
  const cplx k2 = 1.0 + omega * omega;
  if (static_cast<int>(src.F.size()) != n) throw Error("greens.InvalidSource", "F length differs from grid");

  // Lift carrying the boundary datum.
  const cplx bc = I * L * omega - a;
  std::vector<cplx> lift(n, 0.0), rhs(n);
  std::vector<double> x = grid.nodes();
  if (src.B != 0.0) {
    const bool use_a = std::abs(bc) > 1e-3 * a;
    for (int i = 0; i < n; ++i) {
      const double q = x[i] / L;
      cplx g, gpp;
      if (use_a) {
        const cplx c = L * L * src.B / bc;  // phi(L) = 1, phi'(L) = 0
        g = c * q * q * (3.0 - 2.0 * q);
        gpp = c * (6.0 - 12.0 * q) / (L * L);
      } else {
        const cplx c = L * src.B / a;  // phi(L) = 0, phi'(L) = 1
        g = c * L * q * q * (q - 1.0);
        gpp = c * (6.0 * q - 2.0) / L;
      }
      lift[i] = g;
      rhs[i] = src.F[i] - (gpp + k2 * g);
    }
  } else {
    rhs = src.F;
  }
  std::vector<cplx> f1(n), f2(n), p1(n), p2(n);
  for (int i = 0; i < n; ++i) {
    p1[i] = K.phi1(x[i]);
    p2[i] = K.phi2(x[i]);
    f1[i] = p1[i] * rhs[i];
    f2[i] = p2[i] * rhs[i];
  }
  const auto c1 = cumulative(f1, grid.dr);
  const auto c2 = cumulative(f2, grid.dr);
  std::vector<cplx> psi(n);
  for (int i = 0; i < n; ++i) {
    psi[i] = (p2[i] * c1[i] + p1[i] * (c2[n - 1] - c2[i])) / K.cg + lift[i];
  }
  psi[0] = 0.0;
  return psi;
}

PoleTarget pole_compatibility(const Pole& pole, const SourceData& src, const radial::RadialGrid& grid,
                              double a) {
  const int n = grid.n_points;
  if (static_cast<int>(src.F.size()) != n) throw Error("greens.InvalidSource", "F length differs from grid");
  const cplx omega = pole.omega();
  const cplx k2 = 1.0 + omega * omega;
  const double L = grid.L;
  const auto& F = src.F;

  cplx y0 = 0.0, y1 = 0.0;  // psi, psi'
  auto rk4 = [&](double H, cplx fa, cplx fm, cplx fb) {
    auto acc = [&](cplx p, cplx f) { return f - k2 * p; };
    const cplx k1p = y1, k1v = acc(y0, fa);
    const cplx k2p = y1 + 0.5 * H * k1v, k2v = acc(y0 + 0.5 * H * k1p, fm);
    const cplx k3p = y1 + 0.5 * H * k2v, k3v = acc(y0 + 0.5 * H * k2p, fm);
    const cplx k4p = y1 + H * k3v, k4v = acc(y0 + H * k3p, fb);
    y0 += H / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    y1 += H / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  };
  int i = 0;
  for (; i + 2 <= n - 1; i += 2) rk4(2.0 * grid.dr, F[i], F[i + 1], F[i + 2]);
  if (i < n - 1) {
    // one odd interval left; cubic midpoint from the last four nodes
    const cplx fm = 0.0625 * F[n - 4] - 0.3125 * F[n - 3] + 0.9375 * F[n - 2] + 0.3125 * F[n - 1];
    rk4(grid.dr, F[n - 2], fm, F[n - 1]);
  }
  PoleTarget t;
  t.pole = pole;
  t.l_value = (I * L * omega - a) * y0 + a * L * y1;
  t.r_target = (t.l_value - L * L * src.B) / (L * L);
  return t;
}

namespace {

struct Smooth {
  double f, d1, d2;
};

Smooth bump_f(double x) {
  if (x <= 0.0) return {0.0, 0.0, 0.0};
  const double f = std::exp(-1.0 / x);
  const double x2 = x * x;
  return {f, f / x2, f * (1.0 / (x2 * x2) - 2.0 / (x2 * x))};
}

Smooth sigma(double x) {
  if (x <= 0.0) return {0.0, 0.0, 0.0};
  if (x >= 1.0) return {1.0, 0.0, 0.0};
  const Smooth f = bump_f(x);
  Smooth g = bump_f(1.0 - x);
  g.d1 = -g.d1;
  const double s = f.f + g.f;
  const double N = f.d1 * g.f - f.f * g.d1;
  const double dN = f.d2 * g.f - f.f * g.d2;
  return {f.f / s, N / (s * s), dN / (s * s) - 2.0 * N * (f.d1 + g.d1) / (s * s * s)};
}

}  // namespace

double chi(double t) { return sigma(t - 1.0).f; }
double chi_t(double t) { return sigma(t - 1.0).d1; }
double chi_tt(double t) { return sigma(t - 1.0).d2; }

SourceData fourier_source(const History& h, cplx omega) {
  const std::size_t m = h.states.size();
  if (m < 2 || !(h.dt > 0.0) || (m - 1) * h.dt < 2.0 - 1e-9) {
    throw Error("greens.InsufficientHistory", "history must cover [0, 2]");
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (std::abs(h.states[j].time - j * h.dt) > 1e-9 * std::max(1.0, j * h.dt)) {
      throw Error("greens.InsufficientHistory", "history is not uniformly sampled from t = 0");
    }
  }
  const int n = h.states.front().grid.n_points;
  SourceData src;
  src.F.assign(n, 0.0);
  src.origin = "chi_tt u + 2 chi_t u_t + chi h; chi b + chi_t u";
  for (std::size_t j = 0; j < m; ++j) {
    const double w = (j == 0 || j + 1 == m ? 0.5 : 1.0) * h.dt;
    const std::vector<double>* rh = j < h.rh.size() && !h.rh[j].empty() ? &h.rh[j] : nullptr;
    accumulate_fourier(src, omega, j * h.dt, w, h.states[j], rh);
  }
  return src;
}

void accumulate_fourier(SourceData& src, cplx omega, double t, double weight,
                        const radial::RadialState& s, const std::vector<double>* rh) {
  const double c0 = chi(t), c1 = chi_t(t), c2 = chi_tt(t);
  if (c1 == 0.0 && c2 == 0.0 && (c0 == 0.0 || !rh)) return;
  const int n = s.grid.n_points;
  if (src.F.empty()) src.F.assign(n, 0.0);
  const cplx e = weight * std::exp(-I * omega * t);
  for (int i = 1; i < n; ++i) {
    double v = c2 * s.psi[i] + 2.0 * c1 * s.psi_t[i];
    if (rh) v += c0 * (*rh)[i];
    src.F[i] -= e * v;
  }
  src.B += e * c1 * s.psi[n - 1] / s.grid.L;
}

}  // namespace kgstab::greens
