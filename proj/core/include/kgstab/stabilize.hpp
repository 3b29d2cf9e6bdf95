#pragma once

#include <complex>
#include <string>
#include <vector>

#include "kgstab/evolution.hpp"
#include "kgstab/greens.hpp"
#include "kgstab/moments.hpp"
#include "kgstab/spectral.hpp"

namespace kgstab::timedomain {

// discrete: modal amplitudes of the leapfrog propagator (exact cancellation
// of the discrete modes). continuous: Fourier moments on [0,2] and the
// initial value integration at the continuous poles.
enum class TargetRoute { discrete, continuous };

struct ObserverContext {
  EvolutionConfig cfg;
  double beta_target = 0.0;
  TargetRoute route = TargetRoute::discrete;
  std::vector<spectral::Pole> poles;      // conjugate closed, Im < beta_target
  std::vector<DiscreteMode> modes;        // discrete route, same order
  moments::MomentSystem system;           // assembled at the route's frequencies
  double spectral_gap = 0.0;              // Im of the lowest uncancelled pole
};

ObserverContext prepare_observer(const EvolutionConfig& cfg, double beta_target,
                                 TargetRoute route = TargetRoute::discrete, double alpha_max = 60.0,
                                 int extra_columns = 4);

// Targets for fresh initial data. sums[j] = sum_m mu_j^{-m-1} y_j.S h^m
// along a trajectory (nonlinear mode), empty for none.
std::vector<greens::PoleTarget> compute_observer_targets(const RadialState& initial,
                                                         const ObserverContext& ctx,
                                                         const std::vector<cplx>& sums = {});
std::vector<greens::PoleTarget> compute_observer_targets(const RadialState& initial,
                                                         const EvolutionConfig& cfg,
                                                         double beta_target);

// Discrete targets from two stored levels of a running stepper.
std::vector<cplx> discrete_targets(const ObserverContext& ctx, const Stepper& st,
                                   const std::vector<cplx>& sums = {});

struct OpenLoopOptions {
  TargetRoute route = TargetRoute::discrete;
  double alpha_max = 60.0;
  int extra_columns = 4;
  int max_picard = 50;
  double picard_tol = 1e-8;
  double fit_t1 = 5.0;
  double fit_t2 = -1.0;  // negative: T_end
  int compare_stride = 0;  // steps between Picard comparison samples; 0: auto
};

struct StabilizationRun {
  double beta_target = 0.0;
  std::vector<spectral::Pole> poles_cancelled;
  std::vector<cplx> omega_used;  // frequencies of the moment rows
  moments::ControlSignal control;
  int picard_iters = 0;
  bool picard_converged = true;
  std::vector<double> picard_residuals;
  DecayFit decay_fit;
  bool trivial = false;
  std::vector<HistoryRecord> history;
  double initial_norm = 0.0;
  double c_beta = 0.0;
  double moment_c_beta = 0.0;
  double smallness = 0.0;  // 12 C^2 eps / beta + 8 C^3 eps^2 / beta
  std::vector<std::string> warnings;
  bool diverged = false;
  double spectral_gap = 0.0;
};

StabilizationRun open_loop_stabilize(const RadialState& initial, const EvolutionConfig& cfg,
                                     double beta_target, const OpenLoopOptions& opts = {});
StabilizationRun open_loop_stabilize(const RadialState& initial, const ObserverContext& ctx,
                                     const OpenLoopOptions& opts = {});

struct ClosedLoopConfig {
  double T_beta = 6.0;
  double epsilon0 = 0.02;
  bool observer = true;
  int n_periods = 6;
  int picard_per_period = 3;
  bool auto_grow = true;
  int max_grow = 3;
  double kick_time = -1.0;  // negative: no kick
  double kick_fraction = 0.1;
};

struct PeriodRecord {
  int index = 0;  // 1-based
  double t_start = 0.0;
  double norm_start = 0.0;
  double norm_end = 0.0;
  double contraction = 0.0;
  std::vector<double> coeffs;
  double l1 = 0.0;
  bool kicked = false;
};

struct ClosedLoopRun {
  std::vector<HistoryRecord> history;
  std::vector<PeriodRecord> periods;
  double T_beta = 0.0;      // effective period (whole number of steps)
  double bound = 0.0;       // e^{-(beta - eps0) T}
  double log_slope = 0.0;   // fitted slope of log norm per period
  int grow_count = 0;
  bool diverged = false;
  int diverged_period = -1;
  double beta_target = 0.0;
};

ClosedLoopRun closed_loop_run(const RadialState& initial, const ObserverContext& ctx,
                              const ClosedLoopConfig& cl);
ClosedLoopRun closed_loop_run(const RadialState& initial, const EvolutionConfig& cfg,
                              const ClosedLoopConfig& cl, double beta_target);

struct InstabilityRun {
  double s = 0.0;             // largest imaginary-pole rate
  DecayFit fit;               // rate = -growth
  double growth = 0.0;
  double rel_error = 0.0;
  std::vector<HistoryRecord> history;
  bool diverged = false;
};

// Uncontrolled linearized run started on the most unstable eigenfunction.
InstabilityRun run_instability(const EvolutionConfig& cfg, double amplitude = 1e-3);

// psi = sin(k r), psi_t = s psi with k = sqrt(1 - s^2) (sinh form for s > 1)
RadialState imaginary_mode_state(const RadialGrid& grid, double s, double amplitude);

}  // namespace kgstab::timedomain
