#include "kgstab/spectral.hpp"

#include <algorithm>
#include <array>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>

#include "kgstab/error.hpp"

namespace kgstab::spectral {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double pi = std::numbers::pi;

// sin(kL)/k and cos(kL) as entire functions of z = k^2.
struct SC {
  cplx s, c, ds_dz;
};

SC sinc_cos(cplx z, double L) {
  SC out;
  if (std::abs(z) * L * L < 1e-6) {
    const double L2 = L * L;
    out.s = L * (1.0 - z * L2 / 6.0 + z * z * L2 * L2 / 120.0);
    out.c = 1.0 - z * L2 / 2.0 + z * z * L2 * L2 / 24.0;
    out.ds_dz = L * L2 * (-1.0 / 6.0 + z * L2 / 60.0);
    return out;
  }
  const cplx k = std::sqrt(z);
  out.s = std::sin(k * L) / k;
  out.c = std::cos(k * L);
  out.ds_dz = (L * out.c - out.s) / (2.0 * z);
  return out;
}

cplx z_of(cplx omega) { return (omega - I) * (omega + I); }

}  // namespace

cplx bracket_root(cplx omega) {
  const cplx s = std::sqrt(z_of(omega));
  const double d1 = std::abs(s - omega);
  const double d2 = std::abs(-s - omega);
  if (d1 < d2) return s;
  if (d2 < d1) return -s;
  return s.real() >= 0.0 ? s : -s;
}

cplx characteristic_value(cplx omega, double L, double a) {
  const cplx k = bracket_root(omega);
  const cplx base = I * L * omega - a;
  return (base + I * a * L * k) * std::exp(2.0 * I * k * L) - (base - I * a * L * k);
}

cplx characteristic_value_other_branch(cplx omega, double L, double a) {
  const cplx k = -bracket_root(omega);
  const cplx base = I * L * omega - a;
  return (base + I * a * L * k) * std::exp(2.0 * I * k * L) - (base - I * a * L * k);
}

cplx characteristic_entire(cplx omega, double L, double a) {
  const SC sc = sinc_cos(z_of(omega), L);
  return (I * L * omega - a) * sc.s + a * L * sc.c;
}

cplx characteristic_entire_derivative(cplx omega, double L, double a) {
  const SC sc = sinc_cos(z_of(omega), L);
  return I * L * sc.s + (I * L * omega - a) * 2.0 * omega * sc.ds_dz - a * L * L * omega * sc.s;
}

cplx characteristic_derivative(cplx omega, double L, double a) {
  // D = 2ik e^{ikL} E, k' = omega/k
  const cplx k = bracket_root(omega);
  const cplx E = characteristic_entire(omega, L, a);
  const cplx dE = characteristic_entire_derivative(omega, L, a);
  const cplx ph = std::exp(I * k * L);
  if (std::abs(k) < 1e-300) return 2.0 * I * omega * E;
  const cplx dk = omega / k;
  return 2.0 * I * ph * (dk * E + k * I * L * dk * E + k * dE);
}

double asymptotic_line(double L, double a) { return std::log((1.0 + a) / (1.0 - a)) / (2.0 * L); }

cplx asymptotic_seed(int k, double L, double a) {
  return {k * pi / L, asymptotic_line(L, a)};
}

Pole refine_pole(cplx seed, double L, double a, int max_iters) {
  cplx w = seed;
  int it = 0;
  bool done = false;
  int extra = 0;
  for (; it < max_iters; ++it) {
    const cplx E = characteristic_entire(w, L, a);
    const cplx dE = characteristic_entire_derivative(w, L, a);
    if (!std::isfinite(std::abs(E)) || std::abs(dE) == 0.0) break;
    const cplx step = E / dE;
    w -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(w))) {
      done = true;
      if (++extra >= 1) break;
    }
  }
  Pole p;
  p.freq = Frequency::of(w);
  p.char_residual = std::abs(characteristic_value(w, L, a));
  p.newton_iters = it + 1;
  p.kind = w.real() == 0.0 ? PoleKind::purely_imaginary : PoleKind::complex_pair_member;
  if (!std::isfinite(p.char_residual) || (!done && p.char_residual >= 1e-10) ||
      p.char_residual >= 1e-10) {
    throw Error("spectral.NonConvergence", "Newton did not converge from the seed");
  }
  return p;
}

namespace {

struct Winding {
  double turns;
  double min_ratio;
};

Winding winding_raw(double L, double a, double re0, double re1, double im0, double im1) {
  const cplx corners[5] = {{re0, im0}, {re1, im0}, {re1, im1}, {re0, im1}, {re0, im0}};
  double total = 0.0;
  double emin = INFINITY, emax = 0.0;
  auto f = [&](cplx w) {
    const cplx v = characteristic_entire(w, L, a);
    emin = std::min(emin, std::abs(v));
    emax = std::max(emax, std::abs(v));
    return v;
  };
  for (int e = 0; e < 4; ++e) {
    const cplx A = corners[e], B = corners[e + 1];
    const int n0 = 32;
    std::vector<std::pair<double, cplx>> stack;
    cplx fa = f(A);
    for (int j = 1; j <= n0; ++j) {
      double t0 = double(j - 1) / n0, t1 = double(j) / n0;
      cplx f0 = fa;
      cplx f1 = f(A + (B - A) * t1);
      // recursive refinement on the arg jump
      struct Seg { double t0, t1; cplx f0, f1; int depth; };
      std::vector<Seg> work{{t0, t1, f0, f1, 0}};
      while (!work.empty()) {
        Seg s = work.back();
        work.pop_back();
        const double d = std::arg(s.f1 / s.f0);
        if (std::abs(d) > pi / 6.0 && s.depth < 30) {
          const double tm = 0.5 * (s.t0 + s.t1);
          const cplx fm = f(A + (B - A) * tm);
          work.push_back({tm, s.t1, fm, s.f1, s.depth + 1});
          work.push_back({s.t0, tm, s.f0, fm, s.depth + 1});
        } else {
          total += d;
        }
      }
      fa = f1;
    }
  }
  return {total / (2.0 * pi), emax > 0 ? emin / emax : 0.0};
}

bool inside(cplx w, double re0, double re1, double im0, double im1) {
  return w.real() >= re0 && w.real() < re1 && w.imag() >= im0 && w.imag() < im1;
}

void add_unique(std::vector<Pole>& v, const Pole& p, double tol) {
  for (const auto& q : v) {
    if (std::abs(q.omega() - p.omega()) < tol) return;
  }
  v.push_back(p);
}

// Snap near-axis roots onto the imaginary axis.
Pole snap_axis(Pole p, double L, double a) {
  const cplx w = p.omega();
  if (std::abs(w.real()) > 1e-8 * std::max(1.0, std::abs(w))) return p;
  double s = -w.imag();
  for (int it = 0; it < 50; ++it) {
    const double g = imaginary_axis_function(s, L, a);
    const double h = 1e-7 * std::max(1.0, std::abs(s));
    const double dg = (imaginary_axis_function(s + h, L, a) - imaginary_axis_function(s - h, L, a)) / (2 * h);
    const double step = g / dg;
    s -= step;
    if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(s))) break;
  }
  p.freq = Frequency::of(cplx(0.0, -s));
  p.kind = PoleKind::purely_imaginary;
  p.char_residual = std::abs(characteristic_value(p.omega(), L, a));
  return p;
}

std::vector<Pole> search_cell(double L, double a, double re0, double re1, double im0, double im1,
                              int depth, std::vector<SearchCell>* cells, bool& unreliable) {
  const Winding wn = winding_raw(L, a, re0, re1, im0, im1);
  const int count = static_cast<int>(std::lround(wn.turns));
  if (std::abs(wn.turns - count) > 0.05 || wn.min_ratio < 1e-9) {
    unreliable = true;
    return {};
  }
  std::vector<Pole> found;
  if (count > 0) {
    const int ns = 5;
    for (int i = 0; i <= ns && static_cast<int>(found.size()) < count; ++i) {
      for (int j = 0; j <= ns && static_cast<int>(found.size()) < count; ++j) {
        const cplx seed{re0 + (re1 - re0) * (i + 0.5) / (ns + 1), im0 + (im1 - im0) * (j + 0.5) / (ns + 1)};
        try {
          Pole p = snap_axis(refine_pole(seed, L, a), L, a);
          if (inside(p.omega(), re0, re1, im0, im1)) add_unique(found, p, 1e-8);
        } catch (const Error&) {
        }
      }
    }
    if (static_cast<int>(found.size()) != count) {
      if (depth >= 6) {
        throw Error("spectral.NonConvergence", "argument principle count not matched by Newton roots");
      }
      found.clear();
      const double rm = 0.5 * (re0 + re1) + 1e-7 * (re1 - re0);
      const double imm = 0.5 * (im0 + im1) + 1.3e-7 * (im1 - im0);
      for (auto [a0, a1, b0, b1] : {std::array<double, 4>{re0, rm, im0, imm}, {rm, re1, im0, imm},
                                   {re0, rm, imm, im1}, {rm, re1, imm, im1}}) {
        auto sub = search_cell(L, a, a0, a1, b0, b1, depth + 1, nullptr, unreliable);
        if (unreliable) return {};
        for (auto& p : sub) add_unique(found, p, 1e-8);
      }
    }
  }
  if (cells) cells->push_back({re0, re1, im0, im1, count, static_cast<int>(found.size())});
  return found;
}

}  // namespace

int winding_number(double L, double a, double re0, double re1, double im0, double im1) {
  return static_cast<int>(std::lround(winding_raw(L, a, re0, re1, im0, im1).turns));
}

std::vector<Pole> find_poles_in_strip(double L, double a, double beta_max, double alpha_max,
                                      const PoleSearchOptions& opts) {
  if (!(L > 0.0) || !(a > 0.0 && a < 1.0)) {
    throw Error("spectral.InvalidParameters", "need L > 0 and 0 < a < 1", ErrorKind::config);
  }
  const double delta = opts.delta > 0 ? opts.delta : 1e-3 * pi / L;
  const double im_lo = -(std::max(1.0, a / L) + 1.0);
  const double im_hi = beta_max + delta;
  const double cell_re = std::min(alpha_max, 4.0 * pi / L);
  const double w = pi / (2.0 * L);
  const int half_cols = static_cast<int>(std::ceil(cell_re / w - 0.5)) + 1;

  std::vector<Pole> poles;
  if (im_hi > im_lo) {
    const int rows = std::max(1, static_cast<int>(std::ceil((im_hi - im_lo) / std::min(0.5, w))));
    bool ok = false;
    for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
      const double jitter = 1.0 + 0.0173 * attempt;
      const double ww = w * jitter;
      std::vector<SearchCell> cells;
      std::vector<Pole> found;
      bool unreliable = false;
      for (int c = -half_cols; c <= half_cols && !unreliable; ++c) {
        const double re0 = (c - 0.5) * ww, re1 = (c + 0.5) * ww;
        for (int r = 0; r < rows && !unreliable; ++r) {
          // row edges nudged off round values
          const double im0 = r == 0 ? im_lo : im_lo + (im_hi - im_lo) * r / rows + 1.1e-6 * attempt;
          const double im1 = r + 1 == rows ? im_hi : im_lo + (im_hi - im_lo) * (r + 1) / rows + 1.1e-6 * attempt;
          auto sub = search_cell(L, a, re0, re1, im0, im1, 0, &cells, unreliable);
          for (auto& p : sub) add_unique(found, p, opts.dedup_tol);
        }
      }
      if (!unreliable) {
        ok = true;
        poles = std::move(found);
        if (opts.cells) *opts.cells = std::move(cells);
      }
    }
    if (!ok) throw Error("spectral.NonConvergence", "pole on every jittered cell edge");
  }
  // High frequencies: asymptotic seeds
  const double covered = (half_cols + 0.5) * w;
  const int k_lo = std::max(1, static_cast<int>(std::floor(covered * L / pi)) - 1);
  const int k_hi = static_cast<int>(std::ceil(alpha_max * L / pi)) + 1;
  for (int k = k_lo; k <= k_hi; ++k) {
    try {
      Pole p = refine_pole(asymptotic_seed(k, L, a), L, a);
      const cplx z = p.omega();
      if (std::abs(z.real()) >= covered * 0.999 && z.imag() < im_hi && z.imag() >= im_lo) {
        add_unique(poles, p, opts.dedup_tol);
      }
    } catch (const Error&) {
    }
  }

  // symmetrize: keep Re >= 0 representatives and mirror
  std::vector<Pole> out;
  for (const auto& p : poles) {
    if (p.omega().real() >= 0.0) add_unique(out, p, opts.dedup_tol);
  }
  const std::size_t nrep = out.size();
  for (std::size_t i = 0; i < nrep; ++i) {
    if (out[i].kind == PoleKind::complex_pair_member) {
      Pole m = out[i];
      m.freq = Frequency::of(-std::conj(out[i].omega()));
      m.char_residual = std::abs(characteristic_value(m.omega(), L, a));
      out.push_back(m);
    }
  }
  for (const auto& p : out) {
    if (std::abs(p.omega().imag() - beta_max) < delta) {
      throw Error("spectral.PoleOnLine", "a pole lies within delta of the target line");
    }
  }
  std::vector<Pole> res;
  for (const auto& p : out) {
    if (p.omega().imag() < beta_max && std::abs(p.omega().real()) <= alpha_max) res.push_back(p);
  }
  std::sort(res.begin(), res.end(), [](const Pole& x, const Pole& y) {
    if (x.omega().imag() != y.omega().imag()) return x.omega().imag() < y.omega().imag();
    return x.omega().real() < y.omega().real();
  });
  for (const auto& p : res) {
    if (std::abs(characteristic_derivative(p.omega(), L, a)) <= 1e-8) {
      throw Error("spectral.NonConvergence", "pole is not simple");
    }
  }
  return res;
}

double imaginary_axis_function(double s, double L, double a) {
  const double z = 1.0 - s * s;
  double S, C;
  if (std::abs(z) * L * L < 1e-6) {
    const double L2 = L * L;
    S = L * (1.0 - z * L2 / 6.0 + z * z * L2 * L2 / 120.0);
    C = 1.0 - z * L2 / 2.0 + z * z * L2 * L2 / 24.0;
  } else if (z > 0) {
    const double k = std::sqrt(z);
    S = std::sin(k * L) / k;
    C = std::cos(k * L);
  } else {
    const double k = std::sqrt(-z);
    S = std::sinh(k * L) / k;
    C = std::cosh(k * L);
  }
  return (L * s - a) * S + a * L * C;
}

std::vector<double> find_imaginary_poles(double L, double a) {
  if (!(L > 0.0) || !(a > 0.0 && a < 1.0)) {
    throw Error("spectral.InvalidParameters", "need L > 0 and 0 < a < 1", ErrorKind::config);
  }
  if (std::abs(L - std::tan(L)) <= 1e-8) {
    throw Error("spectral.DegenerateL", "L = tan L: zero is a pole");
  }
  const double s_max = std::max(1.0, a / L) + 1e-6;
  const int n = 20000;
  std::vector<double> roots;
  auto g = [&](double s) { return imaginary_axis_function(s, L, a); };
  double s0 = 1e-12, g0 = g(s0);
  for (int i = 1; i <= n; ++i) {
    const double s1 = s_max * i / n;
    const double g1 = g(s1);
    if (g0 == 0.0) {
      roots.push_back(s0);
    } else if ((g0 < 0) != (g1 < 0) && g1 != 0.0) {
      boost::uintmax_t it = 200;
      auto r = boost::math::tools::toms748_solve(g, s0, s1, g0, g1,
                                                 boost::math::tools::eps_tolerance<double>(52), it);
      roots.push_back(0.5 * (r.first + r.second));
    }
    s0 = s1;
    g0 = g1;
  }
  if (g0 == 0.0) roots.push_back(s0);
  std::vector<double> out;
  for (double s : roots) {
    if (std::abs(characteristic_value(cplx(0.0, -s), L, a)) < 1e-10) out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

cplx eta_exact(cplx omega, double L, double a) {
  const cplx k = bracket_root(omega);
  const cplx base = I * L * omega - a;
  const cplx s = std::sin(k * L), c = std::cos(k * L);
  return -I * (base * s + a * L * k * c) / (base * c - a * L * k * s);
}

EtaExpansion eta_expansion(cplx omega, double L, double a) {
  EtaExpansion x;
  x.eta = eta_exact(omega, L, a);
  if (std::abs(x.eta) < 1e-12) throw Error("spectral.AtPole", "eta vanishes at a pole");
  const double beta = omega.imag();
  const cplx e = std::exp(2.0 * I * L * omega);
  x.c0 = (1.0 + a) / (1.0 - a);
  x.eta0 = (1.0 - x.c0 * e) / (1.0 + x.c0 * e);
  x.c1 = 2.0 * I * (L * L * a * a - L * L + 2.0 * a * a) / (L * (1.0 - a) * (1.0 - a));
  x.eta1 = x.c1 * e / ((1.0 + x.c0 * e) * (1.0 + x.c0 * e));
  const double q = (1.0 - a) / (1.0 + a);
  x.d0 = q * std::exp(2.0 * L * beta);
  x.d1 = x.c1 * q * q * std::exp(2.0 * L * beta);
  return x;
}

}  // namespace kgstab::spectral
