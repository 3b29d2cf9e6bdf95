#include "scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kgstab/error.hpp"
#include "kgstab/kernels.hpp"
#include "kgstab/radial.hpp"
#include "kgstab/spectral.hpp"
#include "kgstab/stabilize.hpp"

namespace kgstab::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace kgstab::timedomain;

namespace {

Error config_error(const std::string& what) {
  return Error("cli.ConfigError", what, ErrorKind::config);
}

Error io_error(const std::string& what) { return Error("cli.IoError", what, ErrorKind::config); }

struct Resolved {
  Config cfg;
  std::string name;
  double L = 1.0, a = 0.5, T_end = 30.0;
  double beta = 0.0, beta_max = 0.0, alpha_max = 60.0;
  double beta_inf = 0.0;
  EvolutionConfig evo;
  std::string stem;  // out_dir/prefix
  std::vector<std::string> warnings;
};

Resolved resolve(const std::string& name, const Config& given) {
  Resolved r;
  r.name = name;
  r.cfg = Config::defaults();
  r.cfg.merge(given);
  const Config& c = r.cfg;

  const std::string coords = c.text("coords");
  if (coords != "scaled" && coords != "original") throw config_error("coords must be scaled or original");
  radial::ScalingMap map{radial::Direction::original_to_scaled};
  const bool orig = coords == "original";
  auto length = [&](double x) { return orig ? map.length(x) : x; };
  auto time = [&](double x) { return orig ? map.time(x) : x; };
  auto rate = [&](double x) { return orig ? map.rate(x) : x; };

  r.L = length(c.real("L"));
  r.a = c.real("a");
  r.T_end = time(c.real("T_end"));
  r.alpha_max = rate(c.real("alpha_max"));
  if (!(r.L > 0.0) || !std::isfinite(r.L)) throw config_error("L must be positive");
  if (!(r.a > 0.0 && r.a < 1.0)) throw config_error("a must lie in (0, 1)");
  if (!(r.T_end > 0.0)) throw config_error("T_end must be positive");
  if (!(r.alpha_max > 0.0)) throw config_error("alpha_max must be positive");
  const double tan_gap = std::abs(r.L - std::tan(r.L));
  if (tan_gap <= 1e-8) throw config_error("L = tan L: zero is a pole of the resolvent");
  if (tan_gap < 1e-3) r.warnings.push_back("L is close to tan L; the pole near zero is poorly separated");

  r.beta_inf = spectral::asymptotic_line(r.L, r.a);
  const std::string beta = c.text("beta");
  if (beta == "auto") {
    const double f = c.real("beta_fraction");
    if (!(f > 0.0 && f < 1.0)) throw config_error("beta_fraction must lie in (0, 1)");
    r.beta = f * r.beta_inf;
  } else {
    r.beta = rate(Config::to_real("beta", beta));
  }
  const std::string bmax = c.text("beta_max");
  if (bmax == "auto") {
    r.beta_max = r.beta_inf + 0.5;
  } else {
    r.beta_max = rate(Config::to_real("beta_max", bmax));
  }

  const std::string mode = c.text("mode");
  if (mode != "linearized" && mode != "nonlinear") throw config_error("mode must be linearized or nonlinear");
  const long n = c.integer("n");
  if (n < 11) throw config_error("n must be at least 11");
  const double cfl = c.real("cfl");
  if (!(cfl > 0.0 && cfl <= 0.9)) throw config_error("cfl must lie in (0, 0.9]");
  r.evo = EvolutionConfig::make(r.L, static_cast<int>(n), r.a, cfl,
                                mode == "nonlinear" ? Mode::nonlinear_shifted : Mode::linearized, r.T_end);
  const long every = c.integer("record_every");
  if (every < 1) throw config_error("record_every must be positive");
  r.evo.record_every = static_cast<int>(every);
  r.evo.validate();

  const std::string route = c.text("route");
  if (route != "discrete" && route != "continuous") throw config_error("route must be discrete or continuous");
  if (!(c.real("epsilon") > 0.0)) throw config_error("epsilon must be positive");

  const std::string prefix = c.text("prefix").empty() ? name : c.text("prefix");
  r.stem = (fs::path(c.text("out_dir")) / prefix).string();
  return r;
}

TargetRoute route_of(const Config& c) {
  return c.text("route") == "continuous" ? TargetRoute::continuous : TargetRoute::discrete;
}

// Unstable eigenfunction when there is one, else a smooth bump; H1 norm eps.
RadialState initial_perturbation(const EvolutionConfig& evo, double eps) {
  const auto roots = spectral::find_imaginary_poles(evo.grid.L, evo.a);
  RadialState st(evo.grid);
  if (!roots.empty()) {
    st = imaginary_mode_state(evo.grid, roots.back(), 1.0);
  } else {
    for (int i = 1; i < evo.grid.n_points; ++i) {
      const double x = evo.grid.r(i) / evo.grid.L;
      st.psi[i] = x * std::sin(M_PI * x);
    }
  }
  const double nrm = radial::h1_norm(st);
  for (auto& v : st.psi) v *= eps / nrm;
  for (auto& v : st.psi_t) v *= eps / nrm;
  return st;
}

json pole_json(const spectral::Pole& p) {
  return {{"re", p.omega().real()},
          {"im", p.omega().imag()},
          {"residual", p.char_residual},
          {"kind", p.kind == spectral::PoleKind::purely_imaginary ? "imaginary" : "complex"}};
}

json fit_json(const DecayFit& f) {
  return {{"rate", f.rate}, {"r_squared", f.r_squared}, {"t1", f.t1}, {"t2", f.t2}};
}

void ensure_dir(const std::string& stem) {
  const auto dir = fs::path(stem).parent_path();
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot write " + path);
  return os;
}

struct Outcome {
  json details = json::object();
  json metrics = json::object();
  int exit_code = 0;
};

Outcome run_poles(Resolved& r, bool write, std::vector<std::string>& files, std::ostream& log) {
  Outcome o;
  const auto poles = spectral::find_poles_in_strip(r.L, r.a, r.beta_max, r.alpha_max);
  const auto imag = spectral::find_imaginary_poles(r.L, r.a);
  json list = json::array();
  for (const auto& p : poles) list.push_back(pole_json(p));
  o.details["poles"] = list;
  o.details["imaginary_rates"] = imag;
  o.metrics["count"] = poles.size();
  o.metrics["unstable"] = imag.size();
  o.metrics["largest_rate"] = imag.empty() ? 0.0 : imag.back();
  o.metrics["asymptotic_line"] = r.beta_inf;
  log << "poles: " << poles.size() << " in the strip, " << imag.size() << " unstable\n";
  if (write) {
    const std::string path = r.stem + "_poles.csv";
    auto os = open_out(path);
    os << "re,im,residual,kind\n";
    for (const auto& p : poles) {
      os << fmt17(p.omega().real()) << ',' << fmt17(p.omega().imag()) << ',' << fmt17(p.char_residual) << ','
         << (p.kind == spectral::PoleKind::purely_imaginary ? "imaginary" : "complex") << '\n';
    }
    files.push_back(path);
  }
  return o;
}

Outcome run_instab(Resolved& r, bool write, std::vector<std::string>& files, std::ostream& log) {
  Outcome o;
  auto evo = r.evo;
  evo.mode = Mode::linearized;
  const auto run = run_instability(evo, r.cfg.real("epsilon"));
  o.metrics["s"] = run.s;
  o.metrics["growth"] = run.growth;
  o.metrics["rel_error"] = run.rel_error;
  o.metrics["r_squared"] = run.fit.r_squared;
  o.metrics["growth_original"] = radial::convert_rate(run.growth, radial::ScalingMap{});
  o.details["fit"] = fit_json(run.fit);
  o.details["diverged"] = run.diverged;
  log << "instability: pole rate " << run.s << ", measured growth " << run.growth << "\n";
  if (write) {
    const std::string path = r.stem + "_history.csv";
    write_history_csv(path, run.history);
    files.push_back(path);
  }
  return o;
}

Outcome run_open(Resolved& r, bool write, std::vector<std::string>& files, std::ostream& log) {
  Outcome o;
  const Config& c = r.cfg;
  OpenLoopOptions opts;
  opts.route = route_of(c);
  opts.alpha_max = r.alpha_max;
  opts.extra_columns = static_cast<int>(c.integer("extra_columns"));
  opts.max_picard = static_cast<int>(c.integer("max_picard"));
  opts.picard_tol = c.real("picard_tol");
  opts.fit_t1 = c.real("fit_t1");
  opts.fit_t2 = c.real("fit_t2");
  const auto ctx = prepare_observer(r.evo, r.beta, opts.route, opts.alpha_max, opts.extra_columns);
  const auto init = initial_perturbation(r.evo, c.real("epsilon"));
  const auto run = open_loop_stabilize(init, ctx, opts);

  json poles = json::array();
  for (const auto& p : run.poles_cancelled) poles.push_back(pole_json(p));
  o.details["poles_cancelled"] = poles;
  o.details["coefficients"] = run.control.coeffs;
  o.details["picard_residuals"] = run.picard_residuals;
  o.details["fit"] = fit_json(run.decay_fit);
  o.metrics["beta_target"] = run.beta_target;
  o.metrics["rate"] = run.decay_fit.rate;
  o.metrics["r_squared"] = run.decay_fit.r_squared;
  o.metrics["rate_original"] = radial::convert_rate(run.decay_fit.rate, radial::ScalingMap{});
  o.metrics["picard_iters"] = run.picard_iters;
  o.metrics["picard_converged"] = run.picard_converged;
  o.metrics["c_beta"] = run.c_beta;
  o.metrics["moment_c_beta"] = run.moment_c_beta;
  o.metrics["smallness"] = run.smallness;
  o.metrics["control_l1"] = run.control.l1();
  o.metrics["spectral_gap"] = run.spectral_gap;
  o.metrics["diverged"] = run.diverged;
  for (const auto& w : run.warnings) r.warnings.push_back(w);
  if (run.diverged) r.warnings.push_back("controlled run diverged");
  log << "open-loop: target " << run.beta_target << ", fitted rate " << run.decay_fit.rate << " (r^2 "
      << run.decay_fit.r_squared << "), Picard iterations " << run.picard_iters << "\n";
  if (!run.picard_converged) o.exit_code = 3;

  std::vector<HistoryRecord> twin_hist;
  if (c.boolean("twin")) {
    const auto twin = simulate(init, r.evo, {});
    const double t2 = twin.diverged ? twin.diverged_at : r.T_end;
    const auto fit = measure_decay_rate(twin.records, std::min(c.real("fit_t1"), 0.5 * t2), t2);
    o.metrics["twin_growth"] = -fit.rate;
    o.metrics["twin_diverged"] = twin.diverged;
    log << "open-loop: uncontrolled twin growth " << -fit.rate << (twin.diverged ? " (diverged)" : "") << "\n";
    twin_hist = twin.records;
  }
  if (write) {
    const std::string hist = r.stem + "_history.csv";
    write_history_csv(hist, run.history);
    files.push_back(hist);
    const std::string ctl = r.stem + "_control.csv";
    auto os = open_out(ctl);
    run.control.write_csv(os, r.evo.dt * r.evo.record_every, r.T_end);
    files.push_back(ctl);
    if (c.boolean("twin")) {
      const std::string tw = r.stem + "_twin_history.csv";
      write_history_csv(tw, twin_hist);
      files.push_back(tw);
    }
  }
  return o;
}

Outcome run_closed(Resolved& r, bool write, std::vector<std::string>& files, std::ostream& log) {
  Outcome o;
  const Config& c = r.cfg;
  ClosedLoopConfig cl;
  cl.T_beta = c.real("T_beta");
  cl.epsilon0 = c.real("epsilon0");
  cl.observer = c.boolean("observer");
  cl.n_periods = static_cast<int>(c.integer("periods"));
  cl.picard_per_period = static_cast<int>(c.integer("picard_per_period"));
  cl.auto_grow = c.boolean("auto_grow");
  cl.kick_time = c.real("kick_time");
  cl.kick_fraction = c.real("kick_fraction");
  if (!(cl.T_beta > 2.0)) throw config_error("T_beta must exceed 2 (control support is (2, 4))");
  if (cl.n_periods < 1) throw config_error("periods must be positive");
  const auto ctx = prepare_observer(r.evo, r.beta, route_of(c), r.alpha_max,
                                    static_cast<int>(c.integer("extra_columns")));
  const auto init = initial_perturbation(r.evo, c.real("epsilon"));
  const auto run = closed_loop_run(init, ctx, cl);

  json periods = json::array();
  double worst = 0.0;
  for (const auto& p : run.periods) {
    periods.push_back({{"index", p.index},
                       {"t_start", p.t_start},
                       {"norm_start", p.norm_start},
                       {"norm_end", p.norm_end},
                       {"contraction", p.contraction},
                       {"l1", p.l1},
                       {"kicked", p.kicked},
                       {"coefficients", p.coeffs}});
    if (p.index >= 2 && !p.kicked) worst = std::max(worst, p.contraction);
  }
  o.details["periods"] = periods;
  o.metrics["T_beta"] = run.T_beta;
  o.metrics["bound"] = run.bound;
  o.metrics["worst_contraction"] = worst;
  o.metrics["log_slope"] = run.log_slope;
  o.metrics["grow_count"] = run.grow_count;
  o.metrics["diverged"] = run.diverged;
  o.metrics["beta_target"] = run.beta_target;
  if (run.diverged) r.warnings.push_back("closed-loop run diverged in period " + std::to_string(run.diverged_period));
  log << "closed-loop: period " << run.T_beta << ", bound " << run.bound << ", worst contraction " << worst << "\n";

  if (write) {
    const std::string hist = r.stem + "_history.csv";
    write_history_csv(hist, run.history);
    files.push_back(hist);
    const std::string ctl = r.stem + "_control.csv";
    auto os = open_out(ctl);
    os << "t,b,b'\n";
    const double h = r.evo.dt * r.evo.record_every;
    for (const auto& p : run.periods) {
      moments::ControlSignal b;
      b.basis = ctx.system.basis;
      b.coeffs = p.coeffs;
      const long m = std::lround(run.T_beta / h);
      for (long i = 0; i < m; ++i) {
        const double tl = i * h;
        const bool z = b.coeffs.empty() || b.zero();
        os << fmt17(p.t_start + tl) << ',' << fmt17(z ? 0.0 : b.value(tl)) << ','
           << fmt17(z ? 0.0 : b.deriv(tl)) << '\n';
      }
    }
    files.push_back(ctl);
  }
  return o;
}

Outcome run_verify(Resolved& r, bool write, std::vector<std::string>& files, std::ostream& log) {
  Outcome o;
  kernel_verify::VerifyConfig vc;
  vc.L = r.L;
  vc.a = r.a;
  vc.beta = r.cfg.real("verify_beta");
  vc.A = r.cfg.real("A");
  vc.seed = static_cast<std::uint64_t>(r.cfg.integer("seed"));
  if (!(vc.A >= 1.0)) throw config_error("A must be at least 1");
  const auto rep = kernel_verify::run_verification(vc);
  o.details["report"] = json::parse(rep.to_json());
  int failed = 0;
  for (const auto& ch : rep.checks) {
    if (!ch.informational && !ch.pass) ++failed;
    log << "verify: " << (ch.informational ? "info" : ch.pass ? "pass" : "FAIL") << "  " << ch.name << " = "
        << ch.value << " (limit " << ch.limit << ")\n";
  }
  o.metrics["checks"] = rep.checks.size();
  o.metrics["failed"] = failed;
  o.metrics["all_pass"] = rep.all_pass();
  if (!rep.all_pass()) o.exit_code = 3;
  if (write) {
    const std::string path = r.stem + "_report.json";
    auto os = open_out(path);
    os << rep.to_json() << '\n';
    files.push_back(path);
  }
  return o;
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

Outcome run_sweep(Resolved& r, bool write, std::vector<std::string>& files, std::ostream& log) {
  Outcome o;
  const Config& c = r.cfg;
  const std::string sub = c.text("sweep_scenario");
  if (sub == "sweep" || std::find(scenario_names().begin(), scenario_names().end(), sub) == scenario_names().end()) {
    throw config_error("sweep_scenario must name a non-sweep scenario");
  }
  const std::string key = c.text("sweep_key");
  if (!find_option(key) || key.rfind("sweep_", 0) == 0) throw config_error("sweep_key '" + key + "' cannot be swept");
  const auto values = split_tokens(c.text("sweep_values"));
  if (values.empty()) throw config_error("sweep_values is empty");

  struct Job {
    int code = 0;
    json metrics;
    std::string message;
    std::string log;
  };
  std::vector<Job> jobs(values.size());
  // Validate every point up front so config errors surface before any work.
  std::vector<Config> configs;
  for (const auto& v : values) {
    Config cc = c;
    cc.set(key, v);
    resolve(sub, cc);
    configs.push_back(cc);
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      std::ostringstream wlog;
      try {
        const auto res = run_scenario(sub, configs[i], wlog, false);
        jobs[i].code = res.exit_code;
        jobs[i].metrics = json::parse(res.summary_json)["metrics"];
      } catch (const Error& e) {
        jobs[i].code = e.kind() == ErrorKind::config ? 2 : 3;
        jobs[i].message = e.code() + ": " + e.what();
      } catch (const std::exception& e) {
        jobs[i].code = 3;
        jobs[i].message = e.what();
      }
      jobs[i].log = wlog.str();
    }
  };
  const int nthreads = sweep_threads(static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<std::string> columns;
  for (const auto& j : jobs) {
    if (j.metrics.is_object()) {
      for (auto it = j.metrics.begin(); it != j.metrics.end(); ++it) columns.push_back(it.key());
      break;
    }
  }
  json points = json::array();
  int failures = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    log << jobs[i].log;
    if (!jobs[i].message.empty()) log << "sweep: " << key << " = " << values[i] << " failed: " << jobs[i].message << "\n";
    if (jobs[i].code != 0) ++failures;
    points.push_back({{"value", values[i]}, {"exit_code", jobs[i].code}, {"metrics", jobs[i].metrics},
                      {"error", jobs[i].message}});
  }
  o.details["points"] = points;
  o.metrics["points"] = jobs.size();
  o.metrics["failures"] = failures;
  o.metrics["threads"] = nthreads;
  if (write) {
    const std::string path = r.stem + "_sweep.csv";
    auto os = open_out(path);
    os << key << ",exit_code";
    for (const auto& col : columns) os << ',' << col;
    os << '\n';
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      os << values[i] << ',' << jobs[i].code;
      for (const auto& col : columns) {
        os << ',';
        if (!jobs[i].metrics.is_object() || !jobs[i].metrics.contains(col)) continue;
        const auto& v = jobs[i].metrics[col];
        if (v.is_boolean()) os << (v.get<bool>() ? 1 : 0);
        else if (v.is_number_float()) os << fmt17(v.get<double>());
        else if (v.is_number()) os << v.dump();
      }
      os << '\n';
    }
    files.push_back(path);
  }
  return o;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"poles", "instability", "open-loop",
                                                 "closed-loop", "verify", "sweep"};
  return names;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_history_csv(const std::string& path, const std::vector<HistoryRecord>& h) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot write " + path);
  os << "t,h1_norm,e0,trace_u,b\n";
  for (const auto& rec : h) {
    os << fmt17(rec.t) << ',' << fmt17(rec.h1_norm) << ',' << fmt17(rec.e0) << ',' << fmt17(rec.trace_u) << ','
       << fmt17(rec.b) << '\n';
  }
}

std::vector<std::string> emit_plots(const std::string& history_csv, const std::vector<double>& period_starts,
                                    std::vector<std::string>* warnings) {
  std::ifstream in(history_csv);
  if (!in) throw io_error("cannot read " + history_csv);
  long rows = -1;  // header
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) ++rows;
  }
  const fs::path p(history_csv);
  const std::string base = p.filename().string();
  std::string stem = (p.parent_path() / p.stem()).string();
  if (stem.size() > 8 && stem.compare(stem.size() - 8, 8, "_history") == 0) stem.resize(stem.size() - 8);
  const bool empty = rows <= 0;
  if (empty && warnings) warnings->push_back("history " + history_csv + " has no rows; plots are empty");

  struct Plot {
    std::string suffix, ylabel, column, title;
    bool logy;
  };
  const std::vector<Plot> plots = {{"_energy", "H1 norm", "2", "log energy", true},
                                   {"_control", "b(t)", "5", "control", false}};
  std::vector<std::string> out;
  for (const auto& pl : plots) {
    const std::string script = stem + pl.suffix + ".gp";
    std::ofstream os(script);
    if (!os) throw io_error("cannot write " + script);
    os << "# run from the directory holding " << base << "\n";
    os << "set datafile separator ','\n";
    os << "set terminal pngcairo size 900,600\n";
    os << "set output '" << fs::path(script).stem().string() << ".png'\n";
    os << "set xlabel 't'\nset ylabel '" << pl.ylabel << "'\n";
    if (empty) {
      os << "set title 'empty history'\nset xrange [0:1]\nplot NaN notitle\n";
    } else {
      if (pl.logy) os << "set logscale y\n";
      for (double t : period_starts) {
        os << "set arrow from " << fmt17(t) << ", graph 0 to " << fmt17(t) << ", graph 1 nohead dashtype 2\n";
      }
      os << "plot '" << base << "' using 1:" << pl.column << " skip 1 with lines title '" << pl.title << "'\n";
    }
    out.push_back(script);
  }
  return out;
}

int sweep_threads(int jobs) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("KGSTAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = cap;
  }
  return std::max(1, std::min(n, jobs));
}

ScenarioResult run_scenario(const std::string& name, const Config& cfg, std::ostream& log, bool write) {
  if (std::find(scenario_names().begin(), scenario_names().end(), name) == scenario_names().end()) {
    throw config_error("unknown scenario '" + name + "'");
  }
  Resolved r = resolve(name, cfg);
  ScenarioResult res;
  if (write) ensure_dir(r.stem);

  Outcome o;
  if (name == "poles") o = run_poles(r, write, res.files, log);
  else if (name == "instability") o = run_instab(r, write, res.files, log);
  else if (name == "open-loop") o = run_open(r, write, res.files, log);
  else if (name == "closed-loop") o = run_closed(r, write, res.files, log);
  else if (name == "verify") o = run_verify(r, write, res.files, log);
  else o = run_sweep(r, write, res.files, log);

  if (write && r.cfg.boolean("emit_plots")) {
    std::vector<double> starts;
    if (o.details.contains("periods")) {
      for (const auto& p : o.details["periods"]) starts.push_back(p["t_start"].get<double>());
    }
    for (const auto& f : res.files) {
      if (f.size() >= 12 && f.compare(f.size() - 12, 12, "_history.csv") == 0 &&
          f.find("_twin_history.csv") == std::string::npos) {
        for (auto& s : emit_plots(f, starts, &r.warnings)) res.files.push_back(s);
      }
    }
  }

  json summary;
  summary["scenario"] = name;
  summary["version"] = "0.1.0";
  summary["config"] = json::parse(r.cfg.to_json_object());
  summary["derived"] = {{"L", r.L},
                        {"a", r.a},
                        {"T_end", r.T_end},
                        {"dr", r.evo.grid.dr},
                        {"dt", r.evo.dt},
                        {"asymptotic_line", r.beta_inf},
                        {"asymptotic_line_original", radial::convert_rate(r.beta_inf, radial::ScalingMap{})},
                        {"beta", r.beta},
                        {"beta_max", r.beta_max},
                        {"alpha_max", r.alpha_max}};
  summary["metrics"] = o.metrics;
  for (auto it = o.details.begin(); it != o.details.end(); ++it) summary[it.key()] = it.value();
  summary["warnings"] = r.warnings;
  res.exit_code = o.exit_code;
  summary["exit_code"] = res.exit_code;
  if (write) {
    const std::string path = r.stem + "_summary.json";
    res.files.push_back(path);
    summary["files"] = res.files;
    auto os = open_out(path);
    os << summary.dump(2) << '\n';
  }
  for (const auto& w : r.warnings) log << "warning: " << w << "\n";
  res.warnings = r.warnings;
  res.summary_json = summary.dump();
  return res;
}

}  // namespace kgstab::cli
