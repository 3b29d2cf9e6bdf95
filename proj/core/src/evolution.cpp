#include "kgstab/evolution.hpp"

#include <cmath>
#include <numbers>

#include "kgstab/error.hpp"

namespace kgstab::timedomain {

namespace {
constexpr cplx I{0.0, 1.0};
}

EvolutionConfig EvolutionConfig::make(double L, int n_points, double a, double cfl, Mode mode,
                                      double T_end) {
  EvolutionConfig c;
  c.grid = RadialGrid(L, n_points);
  c.dt = cfl * c.grid.dr;
  c.a = a;
  c.mode = mode;
  c.T_end = T_end;
  c.validate();
  return c;
}

void EvolutionConfig::validate() const {
  if (!(dt > 0.0) || dt / grid.dr > 0.9 + 1e-12) {
    throw Error("timedomain.InvalidConfig", "need 0 < dt <= 0.9 dr", ErrorKind::config);
  }
  if (!(a > 0.0 && a < 1.0)) throw Error("timedomain.InvalidConfig", "need 0 < a < 1", ErrorKind::config);
  if (!(T_end > 0.0)) throw Error("timedomain.InvalidConfig", "T_end must be positive", ErrorKind::config);
  if (record_every < 1) throw Error("timedomain.InvalidConfig", "record_every must be >= 1", ErrorKind::config);
}

long EvolutionConfig::steps() const { return std::lround(T_end / dt); }

double nonlinearity(double u) { return 1.5 * u * u + 0.5 * u * u * u; }

Stepper::Stepper(const EvolutionConfig& cfg, const RadialState& initial, double b0,
                 const std::vector<double>* ext0)
    : cfg_(cfg), t0_(initial.time) {
  cfg_.validate();
  initial.validate();
  const auto& g = cfg_.grid;
  const double dt = cfg_.dt, dr = g.dr, L = g.L, a = cfg_.a, c = cfg_.potential;
  lam_ = dt / dr;
  q_ = 1.0 / (1.0 + lam_ / a);
  const double l2 = lam_ * lam_;
  md_ = 2.0 - 2.0 * l2 + dt * dt * c;
  mJ_ = q_ * (md_ + 2.0 * l2 * dr / L);
  dJ_ = -q_ * (1.0 - lam_ / a);
  gJ_ = q_ * 2.0 * l2 * dr * L / a;
  sJ_ = q_ * dt * dt;

  const int n = g.n_points;
  cur_ = initial.psi;
  h_.assign(n, 0.0);
  next_.assign(n, 0.0);
  compute_source(cur_, ext0);
  std::vector<double> z(n, 0.0), zero(n, 0.0);
  apply(cur_, zero, b0, z);
  prev_.assign(n, 0.0);
  const auto& v = initial.psi_t;
  for (int i = 1; i < n - 1; ++i) {
    const double p1 = 0.5 * (z[i] + 2.0 * dt * v[i]);
    prev_[i] = p1 - 2.0 * dt * v[i];
  }
  const int J = n - 1;
  const double p1 = (z[J] - 2.0 * dt * dJ_ * v[J]) / (1.0 - dJ_);
  prev_[J] = p1 - 2.0 * dt * v[J];
}

void Stepper::compute_source(const std::vector<double>& psi, const std::vector<double>* ext) {
  const auto& g = cfg_.grid;
  const int n = g.n_points;
  if (cfg_.mode == Mode::nonlinear_shifted) {
    h_[0] = 0.0;
    for (int i = 1; i < n; ++i) {
      const double r = g.r(i);
      h_[i] = r * nonlinearity(psi[i] / r);
    }
  } else {
    std::fill(h_.begin(), h_.end(), 0.0);
  }
  if (ext) {
    for (int i = 1; i < n; ++i) h_[i] += (*ext)[i];
  }
}

void Stepper::refresh_source() { compute_source(cur_, nullptr); }

void Stepper::apply(const std::vector<double>& cur, const std::vector<double>& prev, double b,
                    std::vector<double>& out) const {
  const int n = cfg_.grid.n_points;
  const int J = n - 1;
  const double l2 = lam_ * lam_;
  const double dt2 = cfg_.dt * cfg_.dt;
  out[0] = 0.0;
  for (int i = 1; i < J; ++i) {
    out[i] = md_ * cur[i] + l2 * (cur[i + 1] + cur[i - 1]) - prev[i] + dt2 * h_[i];
  }
  out[J] = mJ_ * cur[J] + q_ * 2.0 * l2 * cur[J - 1] + dJ_ * prev[J] + gJ_ * b + sJ_ * h_[J];
}

void check_blowup(const std::vector<double>& psi, double threshold, double t) {
  for (double v : psi) {
    if (!(std::abs(v) <= threshold)) {
      throw Error("timedomain.Blowup", "max|psi| exceeded threshold at t = " + std::to_string(t));
    }
  }
}

void Stepper::advance(double b, const std::vector<double>* ext) {
  compute_source(cur_, ext);
  apply(cur_, prev_, b, next_);
  std::swap(prev_, cur_);
  std::swap(cur_, next_);
  ++n_;
  if ((n_ & 15) == 0) check_blowup(cur_, cfg_.blowup_threshold, time());
}

RadialState Stepper::state_with_next(const std::vector<double>& next) const {
  RadialState s(cfg_.grid);
  s.psi = cur_;
  s.time = time();
  for (int i = 1; i < cfg_.grid.n_points; ++i) s.psi_t[i] = (next[i] - prev_[i]) / (2.0 * cfg_.dt);
  return s;
}

RadialState Stepper::state_backward() const {
  RadialState s(cfg_.grid);
  s.psi = cur_;
  s.time = time();
  for (int i = 1; i < cfg_.grid.n_points; ++i) s.psi_t[i] = (cur_[i] - prev_[i]) / cfg_.dt;
  return s;
}

RadialState step(Stepper& st, double b_value) {
  st.advance(b_value);
  return st.state_backward();
}

void Recorder::before(const Stepper& st, long n) {
  const int J = cfg_.grid.n_points - 1;
  prevJ_ = st.previous()[J];
  rec_ = n % cfg_.record_every == 0;
  if (rec_) {
    older_ = st.previous();
    cur_ = st.current();
  }
}

const RadialState* Recorder::after(const Stepper& st, long n, double b, std::vector<HistoryRecord>& out) {
  const int J = cfg_.grid.n_points - 1;
  const double dt = cfg_.dt;
  const double vJ = (st.current()[J] - prevJ_) / (2.0 * dt);
  const RadialState* res = nullptr;
  if (rec_) {
    state_ = RadialState(cfg_.grid);
    state_.psi = cur_;
    state_.time = st.time() - dt;
    for (int i = 1; i <= J; ++i) state_.psi_t[i] = (st.current()[i] - older_[i]) / (2.0 * dt);
    const auto e = radial::energy_e0(state_, cfg_.potential, cfg_.a, dissipated_);
    out.push_back({state_.time, std::sqrt(e.h1_sq), e.e0, e.trace_u, b, e.e_tilde});
    res = &state_;
  }
  (void)n;
  dissipated_ += 4.0 * std::numbers::pi * vJ * vJ * dt;
  return res;
}

Trajectory run_trajectory(const RadialState& initial, const EvolutionConfig& cfg, const ControlFn& control,
                          const TrajectoryOptions& opts) {
  Trajectory res;
  const double t0 = initial.time;
  auto b_at = [&](double t) { return control ? control(t) : 0.0; };
  Stepper st(cfg, initial, b_at(t0));
  st.set_time_origin(t0);
  const long steps = cfg.steps();
  Recorder rec(cfg);
  const bool sums = opts.modes && cfg.mode == Mode::nonlinear_shifted;
  std::vector<cplx> pw;
  if (opts.modes) {
    res.sums.assign(opts.modes->size(), 0.0);
    for (const auto& m : *opts.modes) pw.push_back(1.0 / m.mu);
  }
  try {
    for (long n = 0; n <= steps; ++n) {
      const double t = t0 + n * cfg.dt;
      const double b = b_at(t);
      rec.before(st, n);
      std::vector<double> older;
      const bool snap = opts.snapshot_stride > 0 && n % opts.snapshot_stride == 0;
      if (snap) older = st.previous();
      std::vector<double> cur;
      if (snap) cur = st.current();
      st.advance(b);
      if (sums) {
        for (std::size_t j = 0; j < opts.modes->size(); ++j) {
          res.sums[j] += pw[j] * modal_source((*opts.modes)[j], st.source());
          pw[j] /= (*opts.modes)[j].mu;
        }
      }
      const RadialState* s = rec.after(st, n, b, res.records);
      if (snap) {
        RadialState x(cfg.grid);
        x.psi = std::move(cur);
        x.time = t;
        for (int i = 1; i < cfg.grid.n_points; ++i) x.psi_t[i] = (st.current()[i] - older[i]) / (2.0 * cfg.dt);
        res.snapshots.push_back(std::move(x));
      }
      if (n == steps && s) res.final_state = *s;
    }
    if (res.final_state.psi.empty()) res.final_state = st.state_backward();
  } catch (const Error& e) {
    if (e.code() != "timedomain.Blowup") throw;
    res.diverged = true;
    res.diverged_at = st.time();
  }
  return res;
}

SimResult simulate(const RadialState& initial, const EvolutionConfig& cfg, const ControlFn& control) {
  return run_trajectory(initial, cfg, control);
}

DiscreteMode discrete_mode(const spectral::Pole& pole, const EvolutionConfig& cfg) {
  const RadialState zero(cfg.grid);
  const Stepper st(cfg, zero);
  const int n = cfg.grid.n_points;
  const int J = n - 1;
  const double l2 = st.lambda() * st.lambda();
  const double dt = cfg.dt;
  const bool imag = pole.omega().real() == 0.0;

  std::vector<cplx> x(n);
  auto shoot = [&](cplx w) {
    const cplx mu = std::exp(I * w * dt);
    const cplx dg = st.diag_interior() - 1.0 / mu - mu;
    x[0] = 0.0;
    x[1] = 1.0;
    for (int i = 1; i < J; ++i) x[i + 1] = -(l2 * x[i - 1] + dg * x[i]) / l2;
    return 2.0 * st.q() * l2 * x[J - 1] + (st.diag_boundary() + st.d_boundary() / mu - mu) * x[J];
  };
  cplx w0 = pole.omega();
  cplx w1 = w0 + (imag ? cplx(0.0, 1e-6) : cplx(1e-6, 1e-6)) * (1.0 + std::abs(w0));
  cplx g0 = shoot(w0), g1 = shoot(w1);
  for (int it = 0; it < 80; ++it) {
    if (g1 == g0) break;
    const cplx w2 = w1 - g1 * (w1 - w0) / (g1 - g0);
    w0 = w1;
    g0 = g1;
    w1 = w2;
    g1 = shoot(w1);
    if (std::abs(w1 - w0) < 1e-15 * (1.0 + std::abs(w1))) break;
  }
  if (imag) w1 = cplx(0.0, w1.imag());
  if (std::abs(w1 - pole.omega()) > 0.05 * (1.0 + std::abs(pole.omega()))) {
    throw Error("timedomain.DiscreteMode", "discrete eigenvalue far from the continuous pole");
  }
  shoot(w1);
  double mx = 0.0;
  for (const auto& v : x) mx = std::max(mx, std::abs(v));
  DiscreteMode m;
  m.pole = pole;
  m.omega_h = w1;
  m.mu = std::exp(I * w1 * dt);
  m.x.resize(n);
  for (int i = 0; i < n; ++i) m.x[i] = x[i] / mx;
  m.y = m.x;
  m.y[J] = m.x[J] / (2.0 * st.q());
  m.yG = m.y[J] * st.g_boundary();
  m.s_interior = dt * dt;
  m.s_boundary = st.s_boundary();
  return m;
}

cplx modal_amplitude(const DiscreteMode& m, const std::vector<double>& cur,
                     const std::vector<double>& prev, const Stepper& st) {
  const int J = static_cast<int>(cur.size()) - 1;
  cplx a = 0.0, d = 0.0;
  for (int i = 1; i < J; ++i) {
    a += m.y[i] * cur[i];
    d -= m.y[i] * prev[i];
  }
  a += m.y[J] * cur[J];
  d += m.y[J] * st.d_boundary() * prev[J];
  return a + d / m.mu;
}

cplx modal_source(const DiscreteMode& m, const std::vector<double>& h) {
  const int J = static_cast<int>(h.size()) - 1;
  cplx s = 0.0;
  for (int i = 1; i < J; ++i) s += m.y[i] * h[i];
  return s * m.s_interior + m.y[J] * m.s_boundary * h[J];
}

DecayFit measure_decay_rate(const std::vector<HistoryRecord>& history, double t1, double t2) {
  DecayFit f;
  f.t1 = t1;
  f.t2 = t2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : history) {
    if (r.t < t1 - 1e-12 || r.t > t2 + 1e-12) continue;
    if (!(r.h1_norm > 1e-300)) {
      f.nonpositive = true;
      f.rate = INFINITY;
      return f;
    }
    const double y = std::log(r.h1_norm);
    pts.push_back({r.t, y});
    sx += r.t;
    sy += y;
    sxx += r.t * r.t;
    sxy += r.t * y;
    ++n;
  }
  if (n < 2) throw Error("timedomain.InsufficientHistory", "fewer than two samples in the fit window");
  const double den = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / den;
  const double icpt = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ym = sy / n;
  for (auto [t, y] : pts) {
    ss_res += (y - icpt - slope * t) * (y - icpt - slope * t);
    ss_tot += (y - ym) * (y - ym);
  }
  f.rate = -slope;
  f.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

}  // namespace kgstab::timedomain
