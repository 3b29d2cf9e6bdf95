#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "kgstab/radial.hpp"
#include "kgstab/spectral.hpp"

namespace kgstab::timedomain {

using cplx = std::complex<double>;
using radial::RadialGrid;
using radial::RadialState;

enum class Mode { linearized, nonlinear_shifted };

struct EvolutionConfig {
  RadialGrid grid;
  double dt = 0.0;
  double a = 0.5;
  Mode mode = Mode::linearized;
  double potential = 1.0;  // coefficient c of psi_tt = psi_rr + c psi + ...
  double T_end = 30.0;
  int record_every = 10;
  double blowup_threshold = 1e6;

  // dt = cfl * dr
  static EvolutionConfig make(double L, int n_points, double a, double cfl = 0.9,
                              Mode mode = Mode::linearized, double T_end = 30.0);
  void validate() const;
  long steps() const;
};

// N(u) = 3/2 u^2 + 1/2 u^3
double nonlinearity(double u);

// Leapfrog with ghost-node Robin boundary
//   psi_t + a psi_r - (a/L) psi = L b
// written as psi^{n+1} = M psi^n + D psi^{n-1} + G b^n + S h^n,
// where h = r N(psi/r) in nonlinear mode plus any external source.
class Stepper {
 public:
  Stepper(const EvolutionConfig& cfg, const RadialState& initial, double b0 = 0.0,
          const std::vector<double>* ext0 = nullptr);

  // Advance one level using b at the current level.
  void advance(double b, const std::vector<double>* ext = nullptr);

  long step_index() const { return n_; }
  double time() const { return t0_ + n_ * cfg_.dt; }
  void set_time_origin(double t0) { t0_ = t0; }
  const std::vector<double>& current() const { return cur_; }
  const std::vector<double>& previous() const { return prev_; }
  // source r*h at the current level (nonlinear part only)
  const std::vector<double>& source() const { return h_; }
  std::vector<double>& current_mut() { return cur_; }
  std::vector<double>& previous_mut() { return prev_; }
  void refresh_source();

  // State at the current level with psi_t from the centered difference
  // against the supplied next level.
  RadialState state_with_next(const std::vector<double>& next) const;
  // psi_t by backward difference (first order), for diagnostics
  RadialState state_backward() const;

  const EvolutionConfig& config() const { return cfg_; }

  // Operator coefficients
  double lambda() const { return lam_; }
  double q() const { return q_; }
  double diag_interior() const { return md_; }
  double diag_boundary() const { return mJ_; }
  double d_boundary() const { return dJ_; }
  double g_boundary() const { return gJ_; }
  double s_boundary() const { return sJ_; }

 private:
  void compute_source(const std::vector<double>& psi, const std::vector<double>* ext);
  void apply(const std::vector<double>& cur, const std::vector<double>& prev, double b,
             std::vector<double>& out) const;

  EvolutionConfig cfg_;
  double t0_ = 0.0;
  long n_ = 0;
  std::vector<double> cur_, prev_, h_, next_;
  double lam_, q_, md_, mJ_, dJ_, gJ_, sJ_;
};

void check_blowup(const std::vector<double>& psi, double threshold, double t);

struct HistoryRecord {
  double t = 0.0;
  double h1_norm = 0.0;
  double e0 = 0.0;
  double trace_u = 0.0;
  double b = 0.0;
  double e_tilde = 0.0;
};

struct SimResult {
  std::vector<HistoryRecord> records;
  bool diverged = false;
  double diverged_at = 0.0;
  RadialState final_state;
};

using ControlFn = std::function<double(double)>;

RadialState step(Stepper& stepper, double b_value);

SimResult simulate(const RadialState& initial, const EvolutionConfig& cfg, const ControlFn& control);

// Records EnergyReports around Stepper::advance calls and accumulates the
// boundary dissipation.
class Recorder {
 public:
  explicit Recorder(const EvolutionConfig& cfg) : cfg_(cfg) {}
  // n: index of the current level
  void before(const Stepper& st, long n);
  // returns the recorded state when level n was sampled
  const RadialState* after(const Stepper& st, long n, double b, std::vector<HistoryRecord>& out);
  double dissipated() const { return dissipated_; }

 private:
  EvolutionConfig cfg_;
  double dissipated_ = 0.0;
  double prevJ_ = 0.0;
  bool rec_ = false;
  std::vector<double> older_, cur_;
  RadialState state_;
};

struct DiscreteMode;

struct TrajectoryOptions {
  int snapshot_stride = 0;                           // 0: none
  const std::vector<DiscreteMode>* modes = nullptr;  // accumulate modal source sums
};

struct Trajectory : SimResult {
  std::vector<RadialState> snapshots;
  std::vector<cplx> sums;  // sum_m mu^{-m-1} y.S h^m per mode
};

Trajectory run_trajectory(const RadialState& initial, const EvolutionConfig& cfg, const ControlFn& control,
                          const TrajectoryOptions& opts = {});

// Eigenpair of the discrete propagator: psi^n = mu^n x with mu = e^{i omega_h dt}.
struct DiscreteMode {
  spectral::Pole pole;  // continuous pole used as the seed
  cplx omega_h;
  cplx mu;
  std::vector<cplx> x;  // right eigenvector, nodes 0..J
  std::vector<cplx> y;  // left eigenvector (unconjugated pairing)
  cplx yG;              // y . G
  double s_interior = 0.0;
  double s_boundary = 0.0;
};

DiscreteMode discrete_mode(const spectral::Pole& pole, const EvolutionConfig& cfg);

// a^n = y.psi^n + y.D psi^{n-1} / mu
cplx modal_amplitude(const DiscreteMode& m, const std::vector<double>& cur,
                     const std::vector<double>& prev, const Stepper& st);
// y . S h
cplx modal_source(const DiscreteMode& m, const std::vector<double>& h);

struct DecayFit {
  double rate = 0.0;
  double r_squared = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  bool nonpositive = false;
};

DecayFit measure_decay_rate(const std::vector<HistoryRecord>& history, double t1, double t2);

}  // namespace kgstab::timedomain
