#include "kgstab/stabilize.hpp"

#include <algorithm>
#include <cmath>

#include "kgstab/error.hpp"

namespace kgstab::timedomain {

namespace {

constexpr cplx I{0.0, 1.0};

EvolutionConfig linear_copy(EvolutionConfig c) {
  c.mode = Mode::linearized;
  return c;
}

double lowest_uncancelled(const EvolutionConfig& cfg, double beta, double alpha_max) {
  const double L = cfg.grid.L, a = cfg.a;
  const double binf = spectral::asymptotic_line(L, a);
  double hi = std::max(binf, beta) + 0.3;
  for (int attempt = 0; attempt < 5; ++attempt) {
    try {
      const auto all = spectral::find_poles_in_strip(L, a, hi, alpha_max);
      double gap = binf;
      for (const auto& p : all) {
        if (p.omega().imag() >= beta) gap = std::min(gap, p.omega().imag());
      }
      return gap;
    } catch (const Error& e) {
      if (e.code() != "spectral.PoleOnLine") throw;
      hi += 0.0137;
    }
  }
  return binf;
}

// indices into ctx.poles of the moment-system representatives
std::vector<int> rep_indices(const std::vector<spectral::Pole>& poles) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (poles[i].omega().real() >= 0.0) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

moments::ControlSignal control_from_targets(const ObserverContext& ctx, const std::vector<cplx>& all) {
  auto sys = ctx.system;
  std::vector<cplx> rep;
  for (int i : rep_indices(ctx.poles)) rep.push_back(all[i]);
  moments::set_targets(sys, rep);
  return moments::synthesize_control(sys);
}

ControlFn as_fn(const moments::ControlSignal& b) {
  if (b.zero()) return {};
  return [b](double t) { return b.value(t); };
}

double weighted_diff(const std::vector<RadialState>& x, const std::vector<RadialState>& y, double beta) {
  const std::size_t n = std::min(x.size(), y.size());
  double m = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    RadialState d = x[k];
    for (std::size_t i = 0; i < d.psi.size(); ++i) {
      d.psi[i] -= y[k].psi[i];
      d.psi_t[i] -= y[k].psi_t[i];
    }
    m = std::max(m, std::exp(beta * x[k].time) * radial::h1_norm(d));
  }
  return m;
}

}  // namespace

ObserverContext prepare_observer(const EvolutionConfig& cfg, double beta_target, TargetRoute route,
                                 double alpha_max, int extra_columns) {
  cfg.validate();
  const double L = cfg.grid.L, a = cfg.a;
  const double binf = spectral::asymptotic_line(L, a);
  if (!(beta_target > 0.0 && beta_target < binf)) {
    throw Error("timedomain.InvalidBeta", "beta_target must lie in (0, (1/2L) log((1+a)/(1-a)))",
                ErrorKind::config);
  }
  ObserverContext ctx;
  ctx.cfg = cfg;
  ctx.beta_target = beta_target;
  ctx.route = route;
  ctx.poles = spectral::find_poles_in_strip(L, a, beta_target, alpha_max);
  ctx.spectral_gap = lowest_uncancelled(cfg, beta_target, alpha_max);

  std::vector<spectral::Pole> rows = ctx.poles;
  if (route == TargetRoute::discrete) {
    ctx.modes.resize(ctx.poles.size());
    for (std::size_t i = 0; i < ctx.poles.size(); ++i) {
      if (ctx.poles[i].omega().real() >= 0.0) ctx.modes[i] = discrete_mode(ctx.poles[i], cfg);
    }
    // mirrors are exact conjugates
    for (std::size_t i = 0; i < ctx.poles.size(); ++i) {
      if (ctx.poles[i].omega().real() >= 0.0) continue;
      for (std::size_t j = 0; j < ctx.poles.size(); ++j) {
        if (std::abs(ctx.poles[j].omega() + std::conj(ctx.poles[i].omega())) < 1e-8) {
          DiscreteMode m = ctx.modes[j];
          m.pole = ctx.poles[i];
          m.omega_h = -std::conj(m.omega_h);
          m.mu = std::conj(m.mu);
          for (auto& v : m.x) v = std::conj(v);
          for (auto& v : m.y) v = std::conj(v);
          m.yG = std::conj(m.yG);
          ctx.modes[i] = m;
        }
      }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].freq = spectral::Frequency::of(ctx.modes[i].omega_h);
  }
  int nrows = 0;
  for (const auto& p : rows) nrows += p.omega().real() == 0.0 ? 1 : (p.omega().real() > 0.0 ? 2 : 0);
  const auto basis = moments::build_basis(std::max(1, nrows + extra_columns));
  ctx.system = moments::build_moment_system(basis, rows, std::vector<cplx>(rows.size(), 0.0));
  return ctx;
}

std::vector<cplx> discrete_targets(const ObserverContext& ctx, const Stepper& st, const std::vector<cplx>& sums) {
  std::vector<cplx> r(ctx.modes.size());
  const double dt = ctx.cfg.dt;
  for (std::size_t j = 0; j < ctx.modes.size(); ++j) {
    const auto& m = ctx.modes[j];
    cplx a = modal_amplitude(m, st.current(), st.previous(), st);
    if (!sums.empty()) a += sums[j];
    r[j] = -(m.mu * dt / m.yG) * a;
  }
  return r;
}

std::vector<greens::PoleTarget> compute_observer_targets(const RadialState& initial, const ObserverContext& ctx,
                                                         const std::vector<cplx>& sums) {
  std::vector<greens::PoleTarget> out;
  if (ctx.route == TargetRoute::discrete) {
    const Stepper st(ctx.cfg, initial, 0.0);
    const auto r = discrete_targets(ctx, st, sums);
    for (std::size_t j = 0; j < ctx.modes.size(); ++j) {
      greens::PoleTarget t;
      t.pole = ctx.poles[j];
      t.pole.freq = spectral::Frequency::of(ctx.modes[j].omega_h);
      t.l_value = modal_amplitude(ctx.modes[j], st.current(), st.previous(), st);
      t.r_target = r[j];
      out.push_back(t);
    }
    return out;
  }
  if (ctx.cfg.mode != Mode::linearized || !sums.empty()) {
    throw Error("timedomain.InvalidConfig", "the continuous target route supports linearized mode only",
                ErrorKind::config);
  }
  // uncontrolled history on [0,2]
  const auto& cfg = ctx.cfg;
  const long m2 = static_cast<long>(std::ceil(2.0 / cfg.dt - 1e-9));
  if (m2 < 2) throw Error("greens.InsufficientHistory", "time step too large for [0,2]");
  std::vector<greens::SourceData> src(ctx.poles.size());
  for (auto& s : src) s.F.assign(cfg.grid.n_points, 0.0);
  Stepper st(cfg, initial, 0.0);
  for (long n = 0; n <= m2; ++n) {
    const std::vector<double> older = st.previous();
    const std::vector<double> cur = st.current();
    st.advance(0.0);
    RadialState s(cfg.grid);
    s.psi = cur;
    s.time = n * cfg.dt;
    for (int i = 1; i < cfg.grid.n_points; ++i) s.psi_t[i] = (st.current()[i] - older[i]) / (2.0 * cfg.dt);
    const double w = (n == 0 || n == m2 ? 0.5 : 1.0) * cfg.dt;
    for (std::size_t j = 0; j < ctx.poles.size(); ++j) {
      greens::accumulate_fourier(src[j], ctx.poles[j].omega(), s.time, w, s, nullptr);
    }
  }
  for (std::size_t j = 0; j < ctx.poles.size(); ++j) {
    out.push_back(greens::pole_compatibility(ctx.poles[j], src[j], cfg.grid, cfg.a));
  }
  return out;
}

std::vector<greens::PoleTarget> compute_observer_targets(const RadialState& initial, const EvolutionConfig& cfg,
                                                         double beta_target) {
  return compute_observer_targets(initial, prepare_observer(cfg, beta_target));
}

StabilizationRun open_loop_stabilize(const RadialState& initial, const EvolutionConfig& cfg, double beta_target,
                                     const OpenLoopOptions& opts) {
  const auto ctx = prepare_observer(cfg, beta_target, opts.route, opts.alpha_max, opts.extra_columns);
  return open_loop_stabilize(initial, ctx, opts);
}

StabilizationRun open_loop_stabilize(const RadialState& initial, const ObserverContext& ctx,
                                     const OpenLoopOptions& opts) {
  StabilizationRun run;
  const auto& cfg = ctx.cfg;
  const double beta = ctx.beta_target;
  run.beta_target = beta;
  run.poles_cancelled = ctx.poles;
  run.spectral_gap = ctx.spectral_gap;
  run.moment_c_beta = ctx.system.c_beta;
  for (const auto& p : ctx.system.poles) run.omega_used.push_back(p.omega());
  run.initial_norm = radial::h1_norm(initial);
  const double t2 = opts.fit_t2 > 0 ? opts.fit_t2 : cfg.T_end;

  ObserverContext lin = ctx;
  lin.cfg = linear_copy(ctx.cfg);

  if (run.initial_norm == 0.0) {
    run.trivial = true;
    run.control.basis = ctx.system.basis;
    run.control.coeffs.assign(ctx.system.basis.N, 0.0);
    run.history = simulate(initial, cfg, {}).records;
    run.decay_fit.t1 = opts.fit_t1;
    run.decay_fit.t2 = t2;
    return run;
  }

  // linearized controlled run
  std::vector<cplx> r0;
  for (const auto& t : compute_observer_targets(initial, lin)) r0.push_back(t.r_target);
  auto b = control_from_targets(ctx, r0);
  const int stride = opts.compare_stride > 0
                         ? opts.compare_stride
                         : static_cast<int>(std::max<long>(cfg.record_every, cfg.steps() / 1000));
  TrajectoryOptions topt;
  topt.snapshot_stride = cfg.mode == Mode::nonlinear_shifted ? stride : 0;
  auto v = run_trajectory(initial, lin.cfg, as_fn(b), topt);
  if (v.diverged) throw Error("timedomain.Blowup", "linearized controlled run diverged");
  double sup = 0.0;
  for (const auto& r : v.records) sup = std::max(sup, std::exp(beta * r.t) * r.h1_norm);
  run.c_beta = std::max(sup, b.l1()) / run.initial_norm;
  const double eps = run.initial_norm;
  const double C = run.c_beta;
  run.smallness = 12.0 * C * C * eps / beta + 8.0 * C * C * C * eps * eps / beta;

  if (cfg.mode == Mode::linearized) {
    run.control = b;
    run.history = std::move(v.records);
    run.decay_fit = measure_decay_rate(run.history, opts.fit_t1, t2);
    return run;
  }

  if (run.smallness > 0.5) {
    run.warnings.push_back("smallness condition 12C^2 eps/beta + 8C^3 eps^2/beta <= 1/2 violated (value " +
                           std::to_string(run.smallness) + ")");
  }
  if (ctx.route != TargetRoute::discrete) {
    throw Error("timedomain.InvalidConfig", "nonlinear runs use the discrete target route", ErrorKind::config);
  }
  topt.modes = &ctx.modes;
  std::vector<RadialState> prev_snaps = std::move(v.snapshots);
  run.picard_converged = false;
  for (int k = 1; k <= opts.max_picard; ++k) {
    auto traj = run_trajectory(initial, cfg, as_fn(b), topt);
    if (traj.diverged) {
      run.diverged = true;
      throw Error("timedomain.Blowup", "nonlinear controlled run diverged in Picard iteration " + std::to_string(k));
    }
    const double diff = weighted_diff(traj.snapshots, prev_snaps, beta) / run.initial_norm;
    run.picard_residuals.push_back(diff);
    run.picard_iters = k;
    if (!std::isfinite(diff)) throw Error("timedomain.PicardDiverged", "non-finite Picard residual");
    if (diff < opts.picard_tol) {
      run.picard_converged = true;
      run.control = b;
      run.history = std::move(traj.records);
      break;
    }
    std::vector<cplx> r;
    {
      const Stepper st(cfg, initial, 0.0);
      r = discrete_targets(ctx, st, traj.sums);
    }
    b = control_from_targets(ctx, r);
    prev_snaps = std::move(traj.snapshots);
    if (k == opts.max_picard) {
      throw Error("timedomain.PicardDiverged", "Picard iteration did not converge");
    }
  }
  run.decay_fit = measure_decay_rate(run.history, opts.fit_t1, t2);
  return run;
}

ClosedLoopRun closed_loop_run(const RadialState& initial, const EvolutionConfig& cfg, const ClosedLoopConfig& cl,
                              double beta_target) {
  return closed_loop_run(initial, prepare_observer(cfg, beta_target), cl);
}

ClosedLoopRun closed_loop_run(const RadialState& initial, const ObserverContext& ctx, const ClosedLoopConfig& cl0) {
  if (ctx.route != TargetRoute::discrete) {
    throw Error("timedomain.InvalidConfig", "closed loop uses the discrete target route", ErrorKind::config);
  }
  ClosedLoopConfig cl = cl0;
  if (!(cl.T_beta >= 4.0)) throw Error("timedomain.InvalidConfig", "T_beta must be >= 4", ErrorKind::config);
  if (!(cl.epsilon0 > 0.0)) throw Error("timedomain.InvalidConfig", "epsilon0 must be positive", ErrorKind::config);
  const auto& cfg = ctx.cfg;
  const double beta = ctx.beta_target;
  const double dt = cfg.dt;
  const bool nonlinear = cfg.mode == Mode::nonlinear_shifted;

  // unstable mode for the kick
  int kick_mode = -1;
  for (std::size_t j = 0; j < ctx.modes.size(); ++j) {
    if (ctx.poles[j].kind == spectral::PoleKind::purely_imaginary && ctx.poles[j].omega().imag() < 0 &&
        (kick_mode < 0 || ctx.poles[j].omega().imag() < ctx.poles[kick_mode].omega().imag())) {
      kick_mode = static_cast<int>(j);
    }
  }

  for (int grow = 0;; ++grow) {
    ClosedLoopRun run;
    run.beta_target = beta;
    run.grow_count = grow;
    const long S = std::lround(cl.T_beta / dt);
    run.T_beta = S * dt;
    run.bound = std::exp(-(beta - cl.epsilon0) * run.T_beta);
    const long kick_step = cl.kick_time >= 0 ? std::lround(cl.kick_time / dt) : -1;

    Stepper st(cfg, initial, 0.0);
    Recorder rec(cfg);
    const auto zero_b = ctx.system.basis;
    std::vector<cplx> pw(ctx.modes.size());
    bool restart = false;
    try {
      for (int p = 0; p < cl.n_periods; ++p) {
        const long n0 = p * S;
        moments::ControlSignal b;
        b.basis = zero_b;
        b.coeffs.assign(zero_b.N, 0.0);
        if (cl.observer && !ctx.modes.empty()) {
          auto targets = discrete_targets(ctx, st);
          b = control_from_targets(ctx, targets);
          if (nonlinear) {
            for (int it = 0; it < cl.picard_per_period; ++it) {
              Stepper trial = st;
              std::vector<cplx> sums(ctx.modes.size(), 0.0);
              for (std::size_t j = 0; j < pw.size(); ++j) pw[j] = 1.0 / ctx.modes[j].mu;
              for (long m = 0; m < S; ++m) {
                trial.advance(b.zero() ? 0.0 : b.value(m * dt));
                for (std::size_t j = 0; j < ctx.modes.size(); ++j) {
                  sums[j] += pw[j] * modal_source(ctx.modes[j], trial.source());
                  pw[j] /= ctx.modes[j].mu;
                }
              }
              b = control_from_targets(ctx, discrete_targets(ctx, st, sums));
            }
          }
        }
        PeriodRecord pr;
        pr.index = p + 1;
        pr.t_start = st.time();
        pr.coeffs = b.coeffs;
        pr.l1 = b.l1();
        for (long m = 0; m < S; ++m) {
          const long n = n0 + m;
          if (n == kick_step) {
            pr.kicked = true;
            const double nrm = radial::h1_norm(st.state_backward());
            auto& cur = st.current_mut();
            auto& prv = st.previous_mut();
            if (kick_mode >= 0) {
              const auto& md = ctx.modes[kick_mode];
              RadialState ms(cfg.grid);
              for (int i = 1; i < cfg.grid.n_points; ++i) {
                ms.psi[i] = md.x[i].real();
                ms.psi_t[i] = (md.x[i].real() - md.x[i].real() / md.mu.real()) / dt;
              }
              const double kappa = cl.kick_fraction * nrm / radial::h1_norm(ms);
              for (int i = 1; i < cfg.grid.n_points; ++i) {
                cur[i] += kappa * md.x[i].real();
                prv[i] += kappa * md.x[i].real() / md.mu.real();
              }
            } else {
              for (auto& v : cur) v *= 1.0 + cl.kick_fraction;
              for (auto& v : prv) v *= 1.0 + cl.kick_fraction;
            }
          }
          const double bv = b.zero() ? 0.0 : b.value(m * dt);
          rec.before(st, n);
          const std::vector<double> older = m == 0 ? st.previous() : std::vector<double>{};
          const std::vector<double> cur = m == 0 ? st.current() : std::vector<double>{};
          st.advance(bv);
          if (m == 0) {
            RadialState s(cfg.grid);
            s.psi = cur;
            for (int i = 1; i < cfg.grid.n_points; ++i) s.psi_t[i] = (st.current()[i] - older[i]) / (2.0 * dt);
            pr.norm_start = radial::h1_norm(s);
            if (p > 0) {
              auto& last = run.periods.back();
              last.norm_end = pr.norm_start;
              last.contraction = last.norm_start > 0 ? last.norm_end / last.norm_start : 0.0;
            }
          }
          rec.after(st, n, bv, run.history);
        }
        run.periods.push_back(pr);
        // The second period's contraction is known once the third has started.
        if (cl.auto_grow && p == 2 && grow < cl.max_grow && run.periods[1].contraction > run.bound &&
            !run.periods[1].kicked) {
          restart = true;
          break;
        }
      }
      if (!restart) {
        // norm at the end of the last period
        Stepper probe = st;
        const std::vector<double> older = probe.previous();
        const std::vector<double> cur = probe.current();
        probe.advance(0.0);
        RadialState s(cfg.grid);
        s.psi = cur;
        for (int i = 1; i < cfg.grid.n_points; ++i) s.psi_t[i] = (probe.current()[i] - older[i]) / (2.0 * dt);
        auto& last = run.periods.back();
        last.norm_end = radial::h1_norm(s);
        last.contraction = last.norm_start > 0 ? last.norm_end / last.norm_start : 0.0;
      }
    } catch (const Error& e) {
      if (e.code() != "timedomain.Blowup") throw;
      run.diverged = true;
      run.diverged_period = static_cast<int>(run.periods.size());
      return run;
    }
    if (restart) {
      cl.T_beta += 2.0;
      continue;
    }
    // fitted slope of log norm_start per period (from the second period on)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (const auto& pr : run.periods) {
      if (pr.index < 2 || !(pr.norm_start > 0)) continue;
      const double y = std::log(pr.norm_start);
      sx += pr.index;
      sy += y;
      sxx += pr.index * pr.index;
      sxy += pr.index * y;
      ++cnt;
    }
    if (cnt >= 2) run.log_slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    return run;
  }
}

RadialState imaginary_mode_state(const RadialGrid& grid, double s, double amplitude) {
  RadialState st(grid);
  const double z = 1.0 - s * s;
  for (int i = 1; i < grid.n_points; ++i) {
    const double r = grid.r(i);
    double v;
    if (z >= 0) {
      v = std::sin(std::sqrt(z) * r);
      if (z == 0) v = r;
    } else {
      v = std::sinh(std::sqrt(-z) * r);
    }
    st.psi[i] = amplitude * v;
    st.psi_t[i] = s * amplitude * v;
  }
  return st;
}

InstabilityRun run_instability(const EvolutionConfig& cfg0, double amplitude) {
  InstabilityRun out;
  const auto cfg = linear_copy(cfg0);
  const auto roots = spectral::find_imaginary_poles(cfg.grid.L, cfg.a);
  if (roots.empty()) throw Error("timedomain.NoUnstablePole", "no imaginary pole found");
  out.s = roots.back();
  // normalize the eigenfunction
  auto init = imaginary_mode_state(cfg.grid, out.s, 1.0);
  const double nrm = radial::h1_norm(init);
  init = imaginary_mode_state(cfg.grid, out.s, amplitude / nrm);
  auto sim = simulate(init, cfg, {});
  out.history = std::move(sim.records);
  out.diverged = sim.diverged;
  const double t_end = out.history.empty() ? 0.0 : out.history.back().t;
  out.fit = measure_decay_rate(out.history, t_end / 3.0, t_end);
  out.growth = -out.fit.rate;
  out.rel_error = std::abs(out.growth - out.s) / out.s;
  return out;
}

}  // namespace kgstab::timedomain
