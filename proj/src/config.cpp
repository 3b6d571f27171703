#include "superrad/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace superrad {

using nlohmann::json;

namespace {

// Cursor into the document that remembers its path for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_, what); }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Node at(const char* key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!j_.contains(key)) throw ConfigError(child_path(key), "missing required field");
    return Node(j_.at(key), child_path(key));
  }
  Node at(std::size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("must be finite");
    return v;
  }
  int integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<int>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  double number_or(const char* key, double def) const { return has(key) ? at(key).number() : def; }
  int integer_or(const char* key, int def) const { return has(key) ? at(key).integer() : def; }
  bool boolean_or(const char* key, bool def) const { return has(key) ? at(key).boolean() : def; }
  std::string string_or(const char* key, const std::string& def) const {
    return has(key) ? at(key).string() : def;
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    if (!j_.is_object()) fail("expected an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) throw ConfigError(child_path(k.c_str()), "unknown field");
  }

 private:
  std::string child_path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
};

int level_index(const Node& n, int levels) {
  const int l = n.integer();
  if (l < 0 || l >= levels) n.fail("level must lie in [0, " + std::to_string(levels) + ")");
  return l;
}

cplx complex_value(const Node& n) {
  return {n.number_or("re", 0.0), n.number_or("im", 0.0)};
}

std::pair<int, int> ordered_pair(const Node& e, int levels) {
  const int u = level_index(e.at("upper"), levels);
  const int l = level_index(e.at("lower"), levels);
  if (u <= l) e.fail("upper must exceed lower");
  return {u, l};
}

void parse_real_pairs(const Node& list, int levels, Eigen::MatrixXd& m, const char* value_key) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Node e = list.at(i);
    e.allow_only({"upper", "lower", value_key});
    const auto [u, l] = ordered_pair(e, levels);
    m(u, l) = e.at(value_key).number();
  }
}

void parse_complex_pairs(const Node& list, int levels, Eigen::MatrixXcd& m) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Node e = list.at(i);
    e.allow_only({"upper", "lower", "re", "im"});
    const auto [u, l] = ordered_pair(e, levels);
    m(u, l) = complex_value(e);
  }
}

SystemParams parse_system(const Node& n) {
  n.allow_only({"levels", "atoms", "omega", "omega_d", "frame", "frame_rungs", "drive", "gamma", "xi", "collective",
                "cavity"});
  const int s = n.integer_or("levels", 2);
  if (s < 2 || s > kMaxLevels) n.at("levels").fail("levels must lie in [2, " + std::to_string(kMaxLevels) + "]");
  const int atoms = n.at("atoms").integer();
  if (atoms < 1) n.at("atoms").fail("atoms must be >= 1");
  SystemParams p = SystemParams::zeros(s, atoms);
  if (n.has("omega")) {
    const Node o = n.at("omega");
    if (o.size() != static_cast<std::size_t>(s)) o.fail("needs one entry per level");
    for (int l = 0; l < s; ++l) p.omega[l] = o.at(l).number();
  }
  p.omega_d = n.number_or("omega_d", 0.0);
  const std::string frame = n.string_or("frame", "rotating");
  if (frame == "rotating")
    p.frame = Frame::Rotating;
  else if (frame == "lab")
    p.frame = Frame::Lab;
  else
    n.at("frame").fail("expected \"rotating\" or \"lab\"");
  if (n.has("frame_rungs")) {
    const Node r = n.at("frame_rungs");
    if (r.size() != static_cast<std::size_t>(s)) r.fail("needs one entry per level");
    for (int l = 0; l < s; ++l) p.frame_rungs.push_back(r.at(l).integer());
  }
  if (n.has("drive")) parse_complex_pairs(n.at("drive"), s, p.drive);
  if (n.has("gamma")) {
    const Node list = n.at("gamma");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node e = list.at(i);
      e.allow_only({"from", "to", "rate"});
      const int f = level_index(e.at("from"), s);
      const int t = level_index(e.at("to"), s);
      if (f == t) e.fail("from and to must differ");
      p.gamma(f, t) = e.at("rate").number();
    }
  }
  if (n.has("xi")) parse_real_pairs(n.at("xi"), s, p.xi, "rate");
  if (n.has("collective") && n.has("cavity")) n.fail("give either collective or cavity, not both");
  if (n.has("cavity")) {
    const Node c = n.at("cavity");
    c.allow_only({"kappa", "omega_c", "lamb_shift_sign", "g"});
    CavityCoupling cav;
    cav.g = Eigen::MatrixXcd::Zero(s, s);
    cav.kappa = c.at("kappa").number();
    cav.omega_c = c.number_or("omega_c", 0.0);
    cav.lamb_shift_sign = c.number_or("lamb_shift_sign", 1.0);
    if (cav.lamb_shift_sign != 1.0 && cav.lamb_shift_sign != -1.0) c.at("lamb_shift_sign").fail("must be +1 or -1");
    if (c.has("g")) parse_complex_pairs(c.at("g"), s, cav.g);
    p.cavity = cav;
  } else {
    DirectRates d{Eigen::MatrixXd::Zero(s, s), Eigen::MatrixXd::Zero(s, s)};
    if (n.has("collective")) {
      const Node c = n.at("collective");
      c.allow_only({"Gamma", "Omega"});
      if (c.has("Gamma")) parse_real_pairs(c.at("Gamma"), s, d.Gamma, "rate");
      if (c.has("Omega")) parse_real_pairs(c.at("Omega"), s, d.Omega, "value");
    }
    p.cavity = d;
  }
  try {
    p.validate();
  } catch (const ValidationError& e) {
    n.fail(e.what());
  }
  return p;
}

TermSet parse_terms(const Node& n) {
  n.allow_only({"atomic", "drive", "lamb_shift", "individual_dissipation", "dephasing", "collective_decay"});
  TermSet t;
  t.atomic = n.boolean_or("atomic", true);
  t.drive = n.boolean_or("drive", true);
  t.lamb_shift = n.boolean_or("lamb_shift", true);
  t.individual_dissipation = n.boolean_or("individual_dissipation", true);
  t.dephasing = n.boolean_or("dephasing", true);
  t.collective_decay = n.boolean_or("collective_decay", true);
  return t;
}

InitialConfig parse_initial(const Node& n, int levels) {
  n.allow_only({"bloch", "level", "components", "steady"});
  InitialConfig ic;
  int forms = n.has("bloch") + n.has("level") + n.has("components");
  ic.steady = n.boolean_or("steady", false);
  if (forms > 1) n.fail("give exactly one of bloch, level, components");
  if (forms == 0) {
    if (!ic.steady) n.fail("give one of bloch, level, components, or steady: true");
    ic.spec = InitialStateSpec::pure_level(levels, 0);
    return ic;
  }
  if (n.has("bloch")) {
    const Node b = n.at("bloch");
    b.allow_only({"theta", "phi"});
    if (levels != 2) b.fail("Bloch parameterisation needs levels = 2");
    const double theta = b.at("theta").number();
    const double phi = b.number_or("phi", 0.0);
    if (theta < 0.0 || theta > M_PI + 1e-12) b.at("theta").fail("theta must lie in [0, pi]");
    ic.spec = InitialStateSpec::bloch(theta, phi);
  } else if (n.has("level")) {
    ic.spec = InitialStateSpec::pure_level(levels, level_index(n.at("level"), levels));
  } else {
    const Node list = n.at("components");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node e = list.at(i);
      e.allow_only({"probability", "amplitudes"});
      PureComponent c;
      c.probability = e.number_or("probability", 1.0);
      const Node a = e.at("amplitudes");
      for (std::size_t k = 0; k < a.size(); ++k) {
        const Node v = a.at(k);
        if (v.raw().is_number()) {
          c.amplitudes.emplace_back(v.number(), 0.0);
        } else {
          if (v.size() != 2) v.fail("amplitude must be a number or [re, im]");
          c.amplitudes.emplace_back(v.at(std::size_t{0}).number(), v.at(std::size_t{1}).number());
        }
      }
      ic.spec.components.push_back(c);
    }
  }
  try {
    ic.spec.validate(levels);
  } catch (const ValidationError& e) {
    n.fail(e.what());
  }
  return ic;
}

SolverConfig parse_solver(const Node& n) {
  n.allow_only({"rel_tol", "abs_tol", "max_step", "steady_eps", "t_max", "max_steps", "restrict_support",
                "multiplicity_scaled_tolerance", "steady_method"});
  SolverConfig c;
  c.rel_tol = n.number_or("rel_tol", c.rel_tol);
  c.abs_tol = n.number_or("abs_tol", c.abs_tol);
  c.max_step = n.number_or("max_step", c.max_step);
  c.steady_eps = n.number_or("steady_eps", c.steady_eps);
  c.t_max = n.number_or("t_max", c.t_max);
  if (n.has("max_steps")) {
    const int m = n.at("max_steps").integer();
    if (m < 1) n.at("max_steps").fail("must be >= 1");
    c.max_steps = static_cast<std::size_t>(m);
  }
  c.restrict_support = n.boolean_or("restrict_support", c.restrict_support);
  c.multiplicity_scaled_tolerance = n.boolean_or("multiplicity_scaled_tolerance", c.multiplicity_scaled_tolerance);
  const std::string m = n.string_or("steady_method", "time-marching");
  if (m == "time-marching")
    c.steady_method = SteadyMethod::TimeMarching;
  else if (m == "direct")
    c.steady_method = SteadyMethod::Direct;
  else
    n.at("steady_method").fail("expected \"time-marching\" or \"direct\"");
  try {
    c.validate();
  } catch (const ValidationError& e) {
    n.fail(e.what());
  }
  return c;
}

std::vector<double> parse_grid(const Node& n) {
  std::vector<double> g;
  if (n.raw().is_array()) {
    for (std::size_t i = 0; i < n.size(); ++i) g.push_back(n.at(i).number());
  } else {
    n.allow_only({"start", "stop", "points"});
    const double a = n.number_or("start", 0.0);
    const double b = n.at("stop").number();
    const int m = n.at("points").integer();
    if (m < 2) n.at("points").fail("need at least 2 points");
    for (int i = 0; i < m; ++i) g.push_back(a + (b - a) * i / (m - 1));
  }
  if (g.empty()) n.fail("grid is empty");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) n.fail("grid must be strictly increasing");
  return g;
}

const std::set<std::string> kSweepParameters{"atoms", "pump", "decay", "dephasing", "Gamma", "Omega", "drive", "alpha"};

SweepConfig parse_sweep(const Node& n) {
  n.allow_only({"parameter", "values", "measure"});
  SweepConfig s;
  s.parameter = n.at("parameter").string();
  if (!kSweepParameters.count(s.parameter)) n.at("parameter").fail("unknown sweep parameter \"" + s.parameter + "\"");
  const Node v = n.at("values");
  for (std::size_t i = 0; i < v.size(); ++i) {
    s.values.push_back(v.at(i).number());
    if (s.parameter == "atoms" && (s.values.back() < 1 || std::floor(s.values.back()) != s.values.back()))
      v.at(i).fail("atom counts must be positive integers");
  }
  if (s.values.empty()) v.fail("needs at least one value");
  const std::string m = n.string_or("measure", "pulse");
  if (m == "pulse")
    s.measure = SweepMeasure::Pulse;
  else if (m == "steady")
    s.measure = SweepMeasure::Steady;
  else if (m == "spectrum")
    s.measure = SweepMeasure::Spectrum;
  else
    n.at("measure").fail("expected pulse, steady or spectrum");
  return s;
}

json pairs_real(const Eigen::MatrixXd& m, const char* key) {
  json a = json::array();
  for (int u = 0; u < m.rows(); ++u)
    for (int l = 0; l < u; ++l)
      if (m(u, l) != 0.0) a.push_back({{"upper", u}, {"lower", l}, {key, m(u, l)}});
  return a;
}

json pairs_complex(const Eigen::MatrixXcd& m) {
  json a = json::array();
  for (int u = 0; u < m.rows(); ++u)
    for (int l = 0; l < u; ++l)
      if (m(u, l) != cplx{0.0, 0.0}) a.push_back({{"upper", u}, {"lower", l}, {"re", m(u, l).real()}, {"im", m(u, l).imag()}});
  return a;
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Pulse:
      return "pulse";
    case Scenario::Driven:
      return "driven";
    case Scenario::PumpedSpectrum:
      return "pumped-spectrum";
    case Scenario::Sweep:
      return "sweep";
    case Scenario::Bench:
      return "bench";
  }
  return "?";
}

std::string to_string(SweepMeasure m) {
  switch (m) {
    case SweepMeasure::Pulse:
      return "pulse";
    case SweepMeasure::Steady:
      return "steady";
    case SweepMeasure::Spectrum:
      return "spectrum";
  }
  return "?";
}

RunConfig parse_config(const json& j) {
  const Node root(j, "");
  root.allow_only({"schema_version", "scenario", "units", "system", "terms", "initial", "solver", "time_grid",
                   "frequency_grid", "spectrum", "sweep", "bench", "output"});
  RunConfig c;
  c.schema_version = root.integer_or("schema_version", 1);
  if (c.schema_version != 1) root.at("schema_version").fail("unsupported schema version");
  const std::string sc = root.at("scenario").string();
  if (sc == "pulse")
    c.scenario = Scenario::Pulse;
  else if (sc == "driven")
    c.scenario = Scenario::Driven;
  else if (sc == "pumped-spectrum")
    c.scenario = Scenario::PumpedSpectrum;
  else if (sc == "sweep")
    c.scenario = Scenario::Sweep;
  else if (sc == "bench")
    c.scenario = Scenario::Bench;
  else
    root.at("scenario").fail("expected pulse, driven, pumped-spectrum, sweep or bench");

  const std::string units = root.string_or("units", "Gamma10");
  if (units == "Gamma10")
    c.units = Units::Gamma10;
  else if (units == "absolute")
    c.units = Units::Absolute;
  else
    root.at("units").fail("expected \"Gamma10\" or \"absolute\"");

  if (c.scenario == Scenario::Bench) {
    if (root.has("bench")) {
      const Node b = root.at("bench");
      b.allow_only({"atoms", "levels", "steps"});
      if (b.has("atoms")) {
        c.bench.atoms.clear();
        const Node a = b.at("atoms");
        for (std::size_t i = 0; i < a.size(); ++i) {
          c.bench.atoms.push_back(a.at(i).integer());
          if (c.bench.atoms.back() < 1) a.at(i).fail("atoms must be >= 1");
        }
        if (c.bench.atoms.empty()) a.fail("needs at least one entry");
      }
      c.bench.levels = b.integer_or("levels", 2);
      if (c.bench.levels < 2 || c.bench.levels > kMaxLevels) b.at("levels").fail("levels out of range");
      c.bench.steps = b.integer_or("steps", 5);
      if (c.bench.steps < 1) b.at("steps").fail("must be >= 1");
    }
  }
  if (root.has("system") || c.scenario != Scenario::Bench) {
    c.params = parse_system(root.at("system"));
  } else {
    c.params = SystemParams::zeros(c.bench.levels, 1);
  }
  if (root.has("terms")) c.terms = parse_terms(root.at("terms"));
  if (root.has("solver")) c.solver = parse_solver(root.at("solver"));

  const bool needs_initial = c.scenario == Scenario::Pulse || c.scenario == Scenario::Driven ||
                             (c.scenario == Scenario::Sweep && root.has("sweep") &&
                              root.at("sweep").string_or("measure", "pulse") == "pulse");
  if (root.has("initial")) {
    c.initial = parse_initial(root.at("initial"), c.params.levels);
  } else if (needs_initial) {
    root.fail("missing required field \"initial\"");
  } else {
    c.initial.spec = InitialStateSpec::pure_level(c.params.levels, 0);
    c.initial.steady = true;
  }

  if (root.has("time_grid")) c.times = parse_grid(root.at("time_grid"));
  if (root.has("frequency_grid")) c.omegas = parse_grid(root.at("frequency_grid"));
  if (root.has("spectrum")) {
    const Node s = root.at("spectrum");
    s.allow_only({"max_dtau", "fit"});
    c.spectrum.max_dtau = s.number_or("max_dtau", c.spectrum.max_dtau);
    if (!(c.spectrum.max_dtau > 0.0)) s.at("max_dtau").fail("must be positive");
    c.spectrum.fit = s.boolean_or("fit", true);
  }
  if (c.scenario == Scenario::Sweep) {
    c.sweep = parse_sweep(root.at("sweep"));
    if ((c.sweep->parameter == "Gamma" || c.sweep->parameter == "Omega" || c.sweep->parameter == "alpha") &&
        !std::holds_alternative<DirectRates>(c.params.cavity)) {
      root.at("sweep").at("parameter").fail("sweeping collective rates needs system.collective, not cavity");
    }
  }

  const bool needs_times = c.scenario == Scenario::Pulse || c.scenario == Scenario::Driven ||
                           (c.scenario == Scenario::Sweep && c.sweep->measure == SweepMeasure::Pulse);
  const bool needs_omegas = c.scenario == Scenario::PumpedSpectrum ||
                            (c.scenario == Scenario::Sweep && c.sweep->measure == SweepMeasure::Spectrum);
  if (needs_times && c.times.empty()) root.fail("missing required field \"time_grid\"");
  if (needs_omegas && c.omegas.empty()) root.fail("missing required field \"frequency_grid\"");
  if (needs_omegas && c.spectrum.fit && c.omegas.size() < 32) {
    root.at("frequency_grid").fail("the Lorentzian fit needs at least 32 frequencies");
  }
  if (c.params.frame == Frame::Lab && c.params.has_drive() && c.terms.drive && c.scenario != Scenario::Driven &&
      c.scenario != Scenario::Pulse) {
    root.at("system").at("frame").fail("a lab-frame drive is supported only for time evolution scenarios");
  }

  if (root.has("output")) {
    const Node o = root.at("output");
    o.allow_only({"path", "format"});
    c.output_path = o.string_or("path", c.output_path);
    const std::string f = o.string_or("format", "csv");
    if (f == "csv")
      c.format = OutputFormat::Csv;
    else if (f == "json-lines")
      c.format = OutputFormat::JsonLines;
    else
      o.at("format").fail("expected \"csv\" or \"json-lines\"");
  }
  c.effective = to_json(c);
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["scenario"] = to_string(c.scenario);
  j["units"] = c.units == Units::Gamma10 ? "Gamma10" : "absolute";
  const SystemParams& p = c.params;
  json sys;
  sys["levels"] = p.levels;
  sys["atoms"] = p.atoms;
  sys["omega"] = p.omega;
  sys["omega_d"] = p.omega_d;
  sys["frame"] = p.frame == Frame::Lab ? "lab" : "rotating";
  if (!p.frame_rungs.empty()) sys["frame_rungs"] = p.frame_rungs;
  sys["drive"] = pairs_complex(p.drive);
  json gam = json::array();
  for (int f = 0; f < p.levels; ++f)
    for (int t = 0; t < p.levels; ++t)
      if (f != t && p.gamma(f, t) != 0.0) gam.push_back({{"from", f}, {"to", t}, {"rate", p.gamma(f, t)}});
  sys["gamma"] = gam;
  sys["xi"] = pairs_real(p.xi, "rate");
  if (const auto* d = std::get_if<DirectRates>(&p.cavity)) {
    sys["collective"] = {{"Gamma", pairs_real(d->Gamma, "rate")}, {"Omega", pairs_real(d->Omega, "value")}};
  } else {
    const auto& cav = std::get<CavityCoupling>(p.cavity);
    sys["cavity"] = {{"kappa", cav.kappa},
                     {"omega_c", cav.omega_c},
                     {"lamb_shift_sign", cav.lamb_shift_sign},
                     {"g", pairs_complex(cav.g)}};
  }
  j["system"] = sys;
  j["terms"] = {{"atomic", c.terms.atomic},
                {"drive", c.terms.drive},
                {"lamb_shift", c.terms.lamb_shift},
                {"individual_dissipation", c.terms.individual_dissipation},
                {"dephasing", c.terms.dephasing},
                {"collective_decay", c.terms.collective_decay}};
  json comps = json::array();
  for (const auto& comp : c.initial.spec.components) {
    json amps = json::array();
    for (const auto& a : comp.amplitudes) amps.push_back({a.real(), a.imag()});
    comps.push_back({{"probability", comp.probability}, {"amplitudes", amps}});
  }
  j["initial"] = {{"components", comps}, {"steady", c.initial.steady}};
  const SolverConfig& s = c.solver;
  j["solver"] = {{"rel_tol", s.rel_tol},
                 {"abs_tol", s.abs_tol},
                 {"max_step", s.max_step},
                 {"steady_eps", s.steady_eps},
                 {"t_max", s.t_max},
                 {"max_steps", s.max_steps},
                 {"restrict_support", s.restrict_support},
                 {"multiplicity_scaled_tolerance", s.multiplicity_scaled_tolerance},
                 {"steady_method", s.steady_method == SteadyMethod::Direct ? "direct" : "time-marching"}};
  if (!c.times.empty()) j["time_grid"] = c.times;
  if (!c.omegas.empty()) j["frequency_grid"] = c.omegas;
  j["spectrum"] = {{"max_dtau", c.spectrum.max_dtau}, {"fit", c.spectrum.fit}};
  if (c.sweep) {
    j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}, {"measure", to_string(c.sweep->measure)}};
  }
  if (c.scenario == Scenario::Bench) {
    j["bench"] = {{"atoms", c.bench.atoms}, {"levels", c.bench.levels}, {"steps", c.bench.steps}};
  }
  j["output"] = {{"path", c.output_path}, {"format", c.format == OutputFormat::Csv ? "csv" : "json-lines"}};
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace superrad
