#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace kgstab::kernel_verify {

using cplx = std::complex<double>;

// Tails over |alpha| >= A, evaluated through Si and Ci.
// h(p) = int_A^inf e^{ip alpha} / alpha; undefined at p = 0.
cplx kernel_h(double p, double A);
// k(p) = int_A^inf sin(p alpha) / alpha, so that the two-sided tail of
// e^{ip alpha} / alpha equals 2i k(p).
double kernel_k(double p, double A);
double kernel_k_deriv(double p, double A);
// Q(p) = two-sided tail of e^{ip alpha} / alpha^2; Q' = -2k.
double kernel_Q(double p, double A);
double kernel_Q_deriv(double p, double A);

struct KernelProbe {
  double A = 1.0;
  double C0 = 0.0;
  std::vector<double> p;
  std::vector<cplx> h;
  std::vector<double> k;
  std::vector<double> k_deriv;
  std::vector<double> Q;
  bool k_bounded = false;
  bool h_bounded = false;
  bool Q_bounded = false;
  double worst_k = 0.0;
  double worst_h_excess = 0.0;  // max of |h| - max(C0, |log p|)
};

// Constant fitted once on the reference grid p in [1e-3, 1e2] (both signs)
// and widened by 5 percent.
double fit_bound_constant(double A);

KernelProbe probe_kernels(double A, double C0, int n = 400, double p_min = 1e-6,
                          double p_max = 10.0);

// g(r) = int f(s) / (x - s) ds with x = t + r for the piecewise-linear f
// through (nodes, values). Nodes are nondecreasing; a repeated node encodes a
// jump. Integrals are exact for the interpolant, principal value included.
std::vector<double> hilbert_piecewise(const std::vector<double>& nodes,
                                      const std::vector<double>& values, double t,
                                      const std::vector<double>& r);

// f sampled uniformly on [0, L]; g returned on the same nodes.
std::vector<double> hilbert_truncated(const std::vector<double>& f, double L, double t);

double l2_norm(const std::vector<double>& f, double L);

struct HilbertCheck {
  int draws = 0;
  double max_ratio = 0.0;
  double bound = 0.0;
  bool pass = false;
};

HilbertCheck check_hilbert_bound(double L, int draws = 100, int n = 400, std::uint64_t seed = 7);

struct OrderFit {
  std::string name;
  double slope = 0.0;
  double max_scaled = 0.0;  // max residual * alpha^order_expected
  double expected = 2.0;
  bool pass = false;
  std::vector<double> alpha;
  std::vector<double> residual;
};

// Residual |eta - eta0 - eta1/alpha| (terms = 2) or |eta - eta0| (terms = 1)
// along omega = alpha + i beta.
OrderFit check_eta_order(double L, double a, double beta, double alpha_lo = 10.0,
                         double alpha_hi = 1e3, int n = 200, int terms = 2);

enum class GammaQuantity { gamma, gamma_r, gamma_r_printed };
enum class GammaBranch { s_le_r, r_lt_s };

// Leading-order Gamma approximation at omega.
cplx gamma_tilde(cplx omega, double r, double s, double L, double a);
// First-order Gamma_r approximation. printed = true drops the
// (i beta / alpha) term.
cplx gamma_r_tilde(cplx omega, double r, double s, double L, double a, bool printed = false);

// Residual max over the sampled (r, s) pairs, as a function of alpha.
OrderFit check_gamma_expansion(double L, double a, double beta, GammaQuantity q,
                               GammaBranch branch, double alpha_lo = 10.0,
                               double alpha_hi = 1e3, int n = 200, int pairs = 20,
                               std::uint64_t seed = 11);

// The five singular tail integrals with the 1/r prefactor.
// form 0: e^-(s) e^-(r) / alpha, s <= r
// form 1: e^-(s) e^+(r) / alpha, s <= r
// form 2: e^-(s) e^-(r) / alpha, r <= s
// form 3: e^-(r) e^+(s) / alpha, r <= s
// form 4: e^-(r) e^{+-}(s) / alpha^2, r <= s (larger of the two)
double singular_integral(int form, double t, double r, double s, double beta, double A);

struct SpotCheck {
  int form = 0;
  double constant = 0.0;  // frozen: twice the reference maximum
  double max_sampled = 0.0;
  double min_r = 0.0;
  bool pass = false;
};

std::vector<SpotCheck> check_singular_integrals(double L, double beta, double A, int samples = 50,
                                                std::uint64_t seed = 13);

struct Check {
  std::string name;
  std::string quantity;  // "exponent", "constant", "ratio", "flag"
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
  bool informational = false;
};

struct VerifyConfig {
  double L = 1.0;
  double a = 0.5;
  double beta = 0.1;
  double A = 1.0;
  std::uint64_t seed = 2024;
};

struct Report {
  VerifyConfig config;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool all_pass() const;
  std::string to_json(int indent = 2) const;
};

Report run_verification(const VerifyConfig& cfg = {});

}  // namespace kgstab::kernel_verify
