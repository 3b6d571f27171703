#include "superrad/scenarios.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "superrad/dynamics.hpp"
#include "superrad/error.hpp"
#include "superrad/initial.hpp"
#include "superrad/observables.hpp"
#include "superrad/oracle.hpp"

namespace superrad {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

json pulse_json(const PulseMetrics& m) {
  return {{"I_max", m.I_max}, {"t0", m.t0}, {"tau", m.tau}, {"is_pulse", m.is_pulse},
          {"width_resolved", m.width_resolved}};
}

json record_json(const ObservableRecord& r, int levels) {
  json j;
  j["P"] = r.P;
  json c = json::object();
  for (int l = 0; l < levels; ++l)
    for (int lp = 0; lp < l; ++lp)
      c["C" + std::to_string(l) + std::to_string(lp)] = {r.C(l, lp).real(), r.C(l, lp).imag()};
  j["C"] = c;
  j["I_ind"] = r.I_ind;
  j["I_col"] = r.I_col;
  j["I_tot"] = r.I_tot;
  if (r.J) j["J"] = *r.J;
  if (r.dJ) j["dJ"] = *r.dJ;
  return j;
}

json fit_json(const TwoLorentzianFit& f) {
  auto one = [](const Lorentzian& l) { return json{{"max", l.max}, {"width", l.width}, {"center", l.center}}; };
  return {{"peak", one(f.peak)},          {"background", one(f.background)}, {"residual", f.residual},
          {"iterations", f.iterations},   {"converged", f.converged},        {"degenerate", f.degenerate}};
}

void set_pair(Eigen::MatrixXd& m, double v) { m(1, 0) = v; }

SystemParams apply_sweep(SystemParams p, const std::string& name, double v) {
  if (name == "atoms") {
    p.atoms = static_cast<int>(v);
  } else if (name == "pump") {
    p.gamma(0, 1) = v;
  } else if (name == "decay") {
    p.gamma(1, 0) = v;
  } else if (name == "dephasing") {
    p.xi(1, 0) = v;
  } else if (name == "drive") {
    p.drive(1, 0) = v;
  } else {
    auto& d = std::get<DirectRates>(p.cavity);
    if (name == "Gamma") {
      set_pair(d.Gamma, v);
    } else if (name == "Omega") {
      set_pair(d.Omega, v);
    } else if (name == "alpha") {
      const auto r = rates_from_detuning_ratio(d.Gamma(1, 0), v);
      d.Gamma(1, 0) = r.Gamma;
      d.Omega(1, 0) = r.Omega;
    } else {
      throw ValidationError("unknown sweep parameter " + name);
    }
  }
  p.validate();
  return p;
}

bool uses_lab_drive(const RunConfig& cfg, const SystemParams& p) {
  return p.frame == Frame::Lab && p.has_drive() && cfg.terms.drive;
}

struct SteadyInfo {
  CollectiveState state;
  double residual;
};

SteadyInfo steady(const Generator& L, const RunConfig& cfg, const std::optional<CollectiveState>& guess = std::nullopt) {
  auto res = steady_state(L, cfg.solver, guess);
  return {std::move(res.state), res.residual};
}

Trajectory time_series(const RunConfig& cfg, const SystemParams& p, const CollectiveRates& r) {
  auto basis = std::make_shared<const Basis>(p.atoms, p.levels);
  EvolveOptions opts;
  opts.keep_states = false;
  opts.rates = &r;
  if (uses_lab_drive(cfg, p)) {
    const auto lab = build_lab_frame_generator(basis, p, r, cfg.terms);
    const double wd = p.omega_d;
    const CollectiveState x0 = initial_state(cfg.initial.spec, basis);
    return evolve(x0, lab, [wd](double t) { return std::polar(1.0, -wd * t); }, cfg.times, cfg.solver, opts);
  }
  const Generator L = build_generator(basis, p, r, cfg.terms);
  const CollectiveState x0 = cfg.initial.steady ? steady(L, cfg).state : initial_state(cfg.initial.spec, basis);
  return evolve(x0, L, cfg.times, cfg.solver, opts);
}

Table observable_table(const Trajectory& tr, int levels) {
  Table t;
  t.columns = {"t"};
  for (const auto& c : observable_columns(levels)) t.columns.push_back(c);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    std::vector<double> row{tr.times[k]};
    const auto obs = observable_row(tr.observables[k], levels);
    row.insert(row.end(), obs.begin(), obs.end());
    t.rows.push_back(std::move(row));
  }
  t.summary["steps"] = tr.steps;
  t.summary["rejected_steps"] = tr.rejected;
  return t;
}

Table pulse(const RunConfig& cfg) {
  const auto r = derive_collective_rates(cfg.params);
  const auto tr = time_series(cfg, cfg.params, r);
  Table t = observable_table(tr, cfg.params.levels);
  t.summary["pulse"] = pulse_json(pulse_metrics(tr));
  return t;
}

Table driven(const RunConfig& cfg) {
  const auto r = derive_collective_rates(cfg.params);
  const auto tr = time_series(cfg, cfg.params, r);
  Table t = observable_table(tr, cfg.params.levels);
  std::vector<double> itot;
  for (const auto& o : tr.observables) itot.push_back(o.I_tot);
  t.summary["intensity_local_maxima"] = count_local_maxima(itot);
  t.summary["final"] = record_json(tr.observables.back(), cfg.params.levels);
  if (!uses_lab_drive(cfg, cfg.params)) {
    try {
      const Generator L = build_generator(cfg.params, r, cfg.terms);
      const auto ss = cfg.initial.steady ? steady(L, cfg) : steady(L, cfg, initial_state(cfg.initial.spec, L.basis_ptr()));
      t.summary["steady"] = record_json(observe(ss.state, r), cfg.params.levels);
      t.summary["steady_residual"] = ss.residual;
    } catch (const NonConvergenceError& e) {
      t.summary["steady_error"] = e.what();
    }
  }
  return t;
}

struct SpectrumPoint {
  ObservableRecord steady;
  double residual;
  Spectrum spectrum;
  std::optional<TwoLorentzianFit> fit;
};

SpectrumPoint pumped_point(const RunConfig& cfg, const SystemParams& p) {
  const auto r = derive_collective_rates(p);
  const Generator L = build_generator(p, r, cfg.terms);
  const auto ss = steady(L, cfg);
  SpectrumPoint pt{observe(ss.state, r), ss.residual,
                   emission_spectrum(ss.state, L, r, cfg.omegas, cfg.solver, cfg.spectrum.max_dtau), std::nullopt};
  if (cfg.spectrum.fit) pt.fit = fit_two_lorentzians(pt.spectrum.omegas, pt.spectrum.values);
  return pt;
}

Table pumped_spectrum(const RunConfig& cfg) {
  const auto pt = pumped_point(cfg, cfg.params);
  Table t;
  t.columns = {"omega", "S"};
  for (std::size_t k = 0; k < pt.spectrum.omegas.size(); ++k) t.rows.push_back({pt.spectrum.omegas[k], pt.spectrum.values[k]});
  t.summary["steady"] = record_json(pt.steady, cfg.params.levels);
  t.summary["steady_residual"] = pt.residual;
  t.summary["spectrum_truncated"] = pt.spectrum.truncated;
  if (pt.spectrum.truncated) t.summary["truncation_bound"] = pt.spectrum.truncation_bound;
  if (pt.fit) t.summary["fit"] = fit_json(*pt.fit);
  return t;
}

template <typename F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
#ifdef _OPENMP
      omp_set_num_threads(1);
#endif
      while (true) {
        const std::size_t i = next++;
        if (i >= n) return;
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Table sweep(const RunConfig& cfg, int jobs) {
  const SweepConfig& sw = *cfg.sweep;
  const int s = cfg.params.levels;
  Table t;
  t.columns = {sw.parameter};
  if (sw.measure == SweepMeasure::Pulse) {
    for (const char* c : {"I_max", "t0", "tau", "is_pulse", "width_resolved"}) t.columns.push_back(c);
  } else if (sw.measure == SweepMeasure::Steady) {
    for (const auto& c : observable_columns(s)) t.columns.push_back(c);
    t.columns.push_back("residual");
  } else {
    for (const char* c : {"peak_max", "peak_width", "peak_center", "background_max", "background_width",
                          "background_center", "fit_residual", "degenerate", "I_col", "I_tot"})
      t.columns.push_back(c);
    if (s == 2)
      for (const char* c : {"dJx", "dJy", "dJz"}) t.columns.push_back(c);
  }
  std::vector<std::vector<double>> rows(sw.values.size());
  parallel_for(sw.values.size(), jobs, [&](std::size_t i) {
    const double v = sw.values[i];
    const SystemParams p = apply_sweep(cfg.params, sw.parameter, v);
    std::vector<double> row{v};
    if (sw.measure == SweepMeasure::Pulse) {
      const auto r = derive_collective_rates(p);
      const auto m = pulse_metrics(time_series(cfg, p, r));
      row.insert(row.end(), {m.I_max, m.t0, m.tau, m.is_pulse ? 1.0 : 0.0, m.width_resolved ? 1.0 : 0.0});
    } else if (sw.measure == SweepMeasure::Steady) {
      const auto r = derive_collective_rates(p);
      const Generator L = build_generator(p, r, cfg.terms);
      const auto ss = steady(L, cfg);
      const auto obs = observable_row(observe(ss.state, r), s);
      row.insert(row.end(), obs.begin(), obs.end());
      row.push_back(ss.residual);
    } else {
      RunConfig local = cfg;
      local.spectrum.fit = true;
      const auto pt = pumped_point(local, p);
      const auto& f = *pt.fit;
      row.insert(row.end(), {f.peak.max, f.peak.width, f.peak.center, f.background.max, f.background.width,
                             f.background.center, f.residual, f.degenerate ? 1.0 : 0.0, pt.steady.I_col,
                             pt.steady.I_tot});
      if (s == 2) row.insert(row.end(), pt.steady.dJ->begin(), pt.steady.dJ->end());
    }
    rows[i] = std::move(row);
  });
  t.rows = std::move(rows);
  return t;
}

std::size_t peak_rss_bytes() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream ss(line.substr(6));
      std::size_t kb = 0;
      ss >> kb;
      return kb * 1024;
    }
  }
  return 0;
}

SystemParams bench_params(int atoms, int levels) {
  SystemParams p = SystemParams::zeros(levels, atoms);
  DirectRates d{Eigen::MatrixXd::Zero(levels, levels), Eigen::MatrixXd::Zero(levels, levels)};
  for (int l = 0; l < levels; ++l) {
    p.omega[l] = 0.3 * l;
    for (int lp = 0; lp < l; ++lp) {
      p.gamma(l, lp) = 0.1;
      p.gamma(lp, l) = 0.05;
      p.xi(l, lp) = 0.1;
      d.Gamma(l, lp) = 1.0;
      d.Omega(l, lp) = 0.2;
      if (l == lp + 1) p.drive(l, lp) = 1.0;
    }
  }
  p.omega_d = 0.3;
  p.cavity = d;
  return p;
}

Table bench(const RunConfig& cfg) {
  Table t;
  t.columns = {"N", "levels", "N_dm", "nnz", "assembly_s", "step_s", "generator_bytes", "peak_rss_bytes"};
  for (int atoms : cfg.bench.atoms) {
    const SystemParams p = bench_params(atoms, cfg.bench.levels);
    const auto r = derive_collective_rates(p);
    const auto t0 = Clock::now();
    const Generator L = build_generator(p, r, TermSet::all());
    const double assembly = seconds_since(t0);
    std::vector<cplx> x(L.dim(), cplx{1.0, 0.0}), y(L.dim());
    const auto t1 = Clock::now();
    for (int k = 0; k < cfg.bench.steps; ++k) {
      L.apply(x, y);
      std::swap(x, y);
    }
    const double step = seconds_since(t1) / cfg.bench.steps;
    t.rows.push_back({static_cast<double>(atoms), static_cast<double>(cfg.bench.levels),
                      static_cast<double>(L.dim()), static_cast<double>(L.nnz()), assembly, step,
                      static_cast<double>(L.matrix().memory_bytes()), static_cast<double>(peak_rss_bytes())});
  }
  return t;
}

std::string format_number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

std::vector<std::string> observable_columns(int levels) {
  std::vector<std::string> c;
  for (int l = levels - 1; l >= 0; --l) c.push_back("P" + std::to_string(l));
  for (int l = levels - 1; l >= 0; --l)
    for (int lp = l - 1; lp >= 0; --lp) {
      c.push_back("ReC" + std::to_string(l) + std::to_string(lp));
      c.push_back("ImC" + std::to_string(l) + std::to_string(lp));
    }
  for (const char* n : {"I_ind", "I_col", "I_tot"}) c.push_back(n);
  if (levels == 2)
    for (const char* n : {"Jx", "Jy", "Jz", "dJx", "dJy", "dJz"}) c.push_back(n);
  return c;
}

std::vector<double> observable_row(const ObservableRecord& r, int levels) {
  std::vector<double> v;
  for (int l = levels - 1; l >= 0; --l) v.push_back(r.P[l]);
  for (int l = levels - 1; l >= 0; --l)
    for (int lp = l - 1; lp >= 0; --lp) {
      v.push_back(r.C(l, lp).real());
      v.push_back(r.C(l, lp).imag());
    }
  v.insert(v.end(), {r.I_ind, r.I_col, r.I_tot});
  if (levels == 2) {
    v.insert(v.end(), r.J->begin(), r.J->end());
    v.insert(v.end(), r.dJ->begin(), r.dJ->end());
  }
  return v;
}

int count_local_maxima(const std::vector<double>& y, double rel_prominence) {
  if (y.size() < 3) return 0;
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  const double eps = rel_prominence * scale;
  int count = 0;
  // walk through plateaus: a maximum is a run strictly above both neighbours
  std::size_t i = 1;
  while (i + 1 < y.size()) {
    if (y[i] > y[i - 1] + eps) {
      std::size_t j = i;
      while (j + 1 < y.size() && std::abs(y[j + 1] - y[i]) <= eps) ++j;
      if (j + 1 < y.size() && y[j + 1] < y[i] - eps) ++count;
      i = j + 1;
    } else {
      ++i;
    }
  }
  return count;
}

Table run_scenario(const RunConfig& cfg, int jobs) {
  switch (cfg.scenario) {
    case Scenario::Pulse:
      return pulse(cfg);
    case Scenario::Driven:
      return driven(cfg);
    case Scenario::PumpedSpectrum:
      return pumped_spectrum(cfg);
    case Scenario::Sweep:
      return sweep(cfg, jobs);
    case Scenario::Bench:
      return bench(cfg);
  }
  throw ValidationError("unknown scenario");
}

void write_table(const Table& t, const RunConfig& cfg, std::ostream& os) {
  const std::string units = cfg.units == Units::Gamma10 ? "Gamma10" : "absolute";
  if (cfg.format == OutputFormat::Csv) {
    os << "# superrad-output schema=" << kOutputSchemaVersion << " scenario=" << to_string(cfg.scenario)
       << " units=" << units << " intensity_constant=1\n";
    os << "# config " << cfg.effective.dump() << '\n';
    os << "# summary " << t.summary.dump() << '\n';
    for (std::size_t k = 0; k < t.columns.size(); ++k) os << (k ? "," : "") << t.columns[k];
    os << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << format_number(row[k]);
      os << '\n';
    }
  } else {
    json head{{"schema", kOutputSchemaVersion}, {"scenario", to_string(cfg.scenario)}, {"units", units},
              {"intensity_constant", 1},        {"config", cfg.effective},             {"summary", t.summary},
              {"columns", t.columns}};
    os << head.dump() << '\n';
    for (const auto& row : t.rows) {
      json r = json::object();
      for (std::size_t k = 0; k < row.size(); ++k) r[t.columns[k]] = row[k];
      os << r.dump() << '\n';
    }
  }
}

double verify_against_oracle(const RunConfig& cfg) {
  SystemParams p = cfg.params;
  p.atoms = std::min(p.atoms, 3);
  while (p.atoms > 1 && std::pow(p.levels, p.atoms) > 64) --p.atoms;
  if (p.frame == Frame::Lab && p.has_drive()) p.frame = Frame::Rotating;
  const auto r = derive_collective_rates(p);
  auto basis = std::make_shared<const Basis>(p.atoms, p.levels);
  TermSet terms = cfg.terms;
  const Generator L = build_generator(basis, p, r, terms);
  const Eigen::MatrixXcd ref = oracle::reference_generator(basis, p, r, terms);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < basis->size(); ++i)
    for (std::size_t j = 0; j < basis->size(); ++j) {
      worst = std::max(worst, std::abs(L.coeff(i, j) - ref(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
      scale = std::max(scale, std::abs(ref(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
  if (worst > 1e-9 * std::max(scale, 1.0)) {
    throw ConsistencyError("generator differs from the full-space reference by " + format_number(worst));
  }
  return worst;
}

std::string run(const RunConfig& cfg, const RunOptions& opts) {
  namespace fs = std::filesystem;
  fs::create_directories(opts.output_dir);
  if (opts.verify_oracle && cfg.scenario != Scenario::Bench) verify_against_oracle(cfg);
  if (opts.dump_generator && cfg.scenario != Scenario::Bench) {
    SystemParams p = cfg.params;
    if (cfg.sweep) p = apply_sweep(p, cfg.sweep->parameter, cfg.sweep->values.front());
    if (p.frame == Frame::Lab && p.has_drive()) p.frame = Frame::Rotating;
    const Generator L = build_generator(p, derive_collective_rates(p), cfg.terms);
    std::ofstream dump(fs::path(opts.output_dir) / "generator.txt");
    dump_coordinates(L, dump);
  }
  const Table t = run_scenario(cfg, opts.jobs);
  const fs::path out = fs::path(opts.output_dir) / cfg.output_path;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream os(out);
  if (!os) throw ValidationError("cannot write output file " + out.string());
  write_table(t, cfg, os);
  return out.string();
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const CapacityError*>(&e)) return 3;
  if (dynamic_cast<const NonConvergenceError*>(&e) || dynamic_cast<const StiffnessError*>(&e)) return 4;
  if (dynamic_cast<const ConsistencyError*>(&e) || dynamic_cast<const SymmetryViolationError*>(&e)) return 5;
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const UnsupportedError*>(&e)) return 2;
  return 1;
}

}  // namespace superrad
