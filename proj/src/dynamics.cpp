#include "superrad/dynamics.hpp"

#include <algorithm>
#include <memory>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "superrad/error.hpp"
#include "superrad/initial.hpp"
#include "superrad/integrator.hpp"

namespace superrad {

namespace {

// Entries reachable from the initial support, together with the generator
// restricted to them. `keep` is empty when no restriction applies.
struct Reduced {
  std::vector<std::uint32_t> keep;
  SparseMatrix matrix;
  bool active = false;

  std::vector<cplx> gather(std::span<const cplx> full) const {
    if (!active) return {full.begin(), full.end()};
    std::vector<cplx> out(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) out[i] = full[keep[i]];
    return out;
  }

  void scatter(std::span<const cplx> part, std::vector<cplx>& full) const {
    if (!active) {
      full.assign(part.begin(), part.end());
      return;
    }
    std::fill(full.begin(), full.end(), cplx{0.0, 0.0});
    for (std::size_t i = 0; i < keep.size(); ++i) full[keep[i]] = part[i];
  }
};

Reduced reduce(const SparseMatrix& a, std::span<const cplx> x, bool enable) {
  Reduced r;
  if (!enable) return r;
  auto keep = reachable_support(a, x);
  if (keep.size() * 10 >= a.dim() * 9) return r;
  r.matrix = a.restricted(keep);
  r.keep = std::move(keep);
  r.active = true;
  return r;
}

IntegratorOptions integrator_options(const SolverConfig& cfg) {
  IntegratorOptions o;
  o.rel_tol = cfg.rel_tol;
  o.abs_tol = cfg.abs_tol;
  o.max_step = cfg.max_step;
  o.max_steps = cfg.max_steps;
  return o;
}

std::vector<double> tolerance_scale(const Basis& basis, const Reduced& red, const SolverConfig& cfg) {
  if (!cfg.multiplicity_scaled_tolerance) return {};
  const auto logc = log_multiplicities(basis);
  std::vector<double> scale;
  if (red.active) {
    scale.reserve(red.keep.size());
    for (auto i : red.keep) scale.push_back(std::exp(-logc[i]));
  } else {
    scale.reserve(logc.size());
    for (double v : logc) scale.push_back(std::exp(-v));
  }
  return scale;
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw ValidationError("time grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ValidationError("time grid must be strictly increasing");
}

void check_dims(const CollectiveState& x0, const Basis& basis) {
  if (x0.values.size() != basis.size()) {
    throw ValidationError("state has " + std::to_string(x0.values.size()) + " entries, generator dimension is " +
                          std::to_string(basis.size()));
  }
}

void record(Trajectory& traj, double t, const CollectiveState& x, const EvolveOptions& opts) {
  traj.times.push_back(t);
  if (opts.rates) traj.observables.push_back(observe(x, *opts.rates));
  if (opts.observer) opts.observer(t, x);
  if (opts.keep_states) traj.states.push_back(x);
}

double inf_norm(std::span<const cplx> v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ValidationError("solver tolerances must be positive");
  if (!(max_step >= 0.0)) throw ValidationError("max_step must be >= 0");
  if (!(steady_eps > 0.0)) throw ValidationError("steady_eps must be positive");
  if (!(t_max > 0.0)) throw ValidationError("t_max must be positive");
  if (max_steps == 0) throw ValidationError("max_steps must be positive");
}

std::vector<double> log_multiplicities(const Basis& basis) {
  std::vector<double> out(basis.size());
  Occupation n = basis.first();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = basis.log_multiplicity(n);
    basis.next(n);
  }
  return out;
}

Trajectory evolve(const CollectiveState& x0, const Generator& L, std::span<const double> grid,
                  const SolverConfig& cfg, const EvolveOptions& opts) {
  cfg.validate();
  check_grid(grid);
  check_dims(x0, L.basis());
  const Reduced red = reduce(L.matrix(), x0.values, cfg.restrict_support);
  const SparseMatrix& a = red.active ? red.matrix : L.matrix();

  Dopri5 integ([&a](double, std::span<const cplx> y, std::span<cplx> dy) { a.apply(y, dy); }, a.dim(),
               integrator_options(cfg), tolerance_scale(L.basis(), red, cfg));
  const auto y0 = red.gather(x0.values);
  integ.reset(grid.front(), y0);

  Trajectory traj;
  CollectiveState x{L.basis_ptr(), std::vector<cplx>(L.dim())};
  integ.integrate_grid(grid, [&](std::size_t, double t, std::span<const cplx> y) {
    red.scatter(y, x.values);
    record(traj, t, x, opts);
  });
  traj.steps = integ.steps();
  traj.rejected = integ.rejected();
  return traj;
}

Trajectory evolve(const CollectiveState& x0, const LabFrameGenerator& L, const DriveCoefficient& f,
                  std::span<const double> grid, const SolverConfig& cfg, const EvolveOptions& opts) {
  cfg.validate();
  check_grid(grid);
  check_dims(x0, L.static_part.basis());
  const std::size_t n = L.static_part.dim();
  std::vector<cplx> tmp(n);
  auto rhs = [&](double t, std::span<const cplx> y, std::span<cplx> dy) {
    L.static_part.apply(y, dy);
    const cplx c = f(t);
    if (c != cplx{0.0, 0.0}) {
      L.raise.apply(y, tmp);
      for (std::size_t i = 0; i < n; ++i) dy[i] += c * tmp[i];
      L.lower.apply(y, tmp);
      const cplx cc = std::conj(c);
      for (std::size_t i = 0; i < n; ++i) dy[i] += cc * tmp[i];
    }
  };
  const Reduced none;
  Dopri5 integ(rhs, n, integrator_options(cfg), tolerance_scale(L.static_part.basis(), none, cfg));
  integ.reset(grid.front(), x0.values);
  Trajectory traj;
  CollectiveState x{L.static_part.basis_ptr(), std::vector<cplx>(n)};
  integ.integrate_grid(grid, [&](std::size_t, double t, std::span<const cplx> y) {
    x.values.assign(y.begin(), y.end());
    record(traj, t, x, opts);
  });
  traj.steps = integ.steps();
  traj.rejected = integ.rejected();
  return traj;
}

double steady_residual(const Generator& L, const CollectiveState& x) {
  std::vector<cplx> lx(x.values.size());
  L.apply(x.values, lx);
  const double nx = inf_norm(x.values);
  return nx == 0.0 ? std::numeric_limits<double>::infinity() : inf_norm(lx) / nx;
}

namespace {

CollectiveState normalised(CollectiveState x) {
  const double tr = trace(x);
  if (!(std::abs(tr) > 0.0) || !std::isfinite(tr)) throw ConsistencyError("steady state has vanishing trace");
  for (auto& v : x.values) v /= tr;
  return x;
}

SteadyStateResult steady_marching(const Generator& L, const SolverConfig& cfg, const CollectiveState& x0) {
  const Reduced red = reduce(L.matrix(), x0.values, cfg.restrict_support);
  const SparseMatrix& a = red.active ? red.matrix : L.matrix();
  const auto rhs = [&a](double, std::span<const cplx> y, std::span<cplx> dy) { a.apply(y, dy); };
  const auto scale = tolerance_scale(L.basis(), red, cfg);
  IntegratorOptions opt = integrator_options(cfg);
  auto integ = std::make_unique<Dopri5>(rhs, a.dim(), opt, scale);
  integ->reset(0.0, red.gather(x0.values));

  // fastest diagonal rate sets the first chunk length
  double rate = 0.0;
  const auto rp = a.row_ptr();
  const auto ci = a.cols();
  const auto v = a.values();
  for (std::size_t r = 0; r < a.dim(); ++r)
    for (auto k = rp[r]; k < rp[r + 1]; ++k)
      if (ci[k] == r) rate = std::max(rate, std::abs(v[k]));
  if (rate == 0.0) rate = std::max(a.max_abs(), 1.0);
  double chunk = 1.0 / rate;

  // a stalled residual near the tolerance floor tightens the tolerances tenfold
  constexpr double kTolFloor = 1e-14;
  std::vector<cplx> dy(a.dim());
  double residual = std::numeric_limits<double>::infinity();
  double previous = residual;
  while (true) {
    const auto& y = integ->state();
    a.apply(y, dy);
    const double ny = inf_norm(y);
    residual = ny == 0.0 ? std::numeric_limits<double>::infinity() : inf_norm(dy) / ny;
    if (residual < cfg.steady_eps) break;
    if (integ->time() >= cfg.t_max) {
      throw NonConvergenceError("steady state not reached by t_max = " + std::to_string(cfg.t_max) +
                                    " (residual " + std::to_string(residual) + ")",
                                residual);
    }
    if (residual > 0.5 * previous && residual < 10.0 * rate * opt.rel_tol && opt.rel_tol > kTolFloor) {
      opt.rel_tol = std::max(opt.rel_tol * 0.1, kTolFloor);
      opt.abs_tol = std::max(opt.abs_tol * 0.1, kTolFloor * kTolFloor);
      const double t = integ->time();
      const std::vector<cplx> keep(y.begin(), y.end());
      const std::size_t steps = integ->steps();
      opt.max_steps = cfg.max_steps > steps ? cfg.max_steps - steps : 1;
      integ = std::make_unique<Dopri5>(rhs, a.dim(), opt, scale);
      integ->reset(t, keep);
    }
    previous = residual;
    integ->advance_to(std::min(cfg.t_max, integ->time() + chunk));
    chunk = std::min(chunk * 1.5, cfg.t_max / 20.0);
  }
  CollectiveState x{L.basis_ptr(), std::vector<cplx>(L.dim())};
  red.scatter(integ->state(), x.values);
  x = normalised(std::move(x));
  return {std::move(x), residual, integ->time()};
}

SteadyStateResult steady_direct(const Generator& L, const SolverConfig& cfg, const CollectiveState& x0) {
  const Reduced red = reduce(L.matrix(), x0.values, cfg.restrict_support);
  const SparseMatrix& a = red.active ? red.matrix : L.matrix();
  const std::size_t n = a.dim();

  // trace weights on the (possibly restricted) index set
  const Basis& basis = L.basis();
  std::vector<double> logw(n, -std::numeric_limits<double>::infinity());
  {
    std::vector<std::int64_t> pos(basis.size(), -1);
    if (red.active)
      for (std::size_t i = 0; i < n; ++i) pos[red.keep[i]] = static_cast<std::int64_t>(i);
    else
      for (std::size_t i = 0; i < n; ++i) pos[i] = static_cast<std::int64_t>(i);
    const auto& diag = basis.diagonal_subbasis();
    const auto& lm = basis.diagonal_log_multiplicity();
    for (std::size_t k = 0; k < diag.size(); ++k)
      if (pos[diag[k]] >= 0) logw[static_cast<std::size_t>(pos[diag[k]])] = lm[k];
  }
  const double logmax = *std::max_element(logw.begin(), logw.end());
  if (!std::isfinite(logmax)) throw ConsistencyError("reachable set contains no population entry");
  std::size_t replaced = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (logw[i] == logmax) {
      replaced = i;
      break;
    }

  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(a.nnz() + n);
  const auto rp = a.row_ptr();
  const auto ci = a.cols();
  const auto v = a.values();
  for (std::size_t r = 0; r < n; ++r) {
    if (r == replaced) continue;
    for (auto k = rp[r]; k < rp[r + 1]; ++k)
      trip.emplace_back(static_cast<int>(r), static_cast<int>(ci[k]), v[k]);
  }
  for (std::size_t c = 0; c < n; ++c)
    if (std::isfinite(logw[c])) trip.emplace_back(static_cast<int>(replaced), static_cast<int>(c), std::exp(logw[c] - logmax));

  Eigen::SparseMatrix<cplx> m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) {
    throw NonConvergenceError("sparse factorisation of the steady-state system failed: " + lu.lastErrorMessage(),
                              std::numeric_limits<double>::infinity());
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
  rhs(static_cast<Eigen::Index>(replaced)) = std::exp(-logmax);
  Eigen::VectorXcd sol = lu.solve(rhs);
  CollectiveState x{L.basis_ptr(), std::vector<cplx>(L.dim())};
  red.scatter(std::span<const cplx>(sol.data(), n), x.values);
  x = normalised(std::move(x));
  const double residual = steady_residual(L, x);
  if (!(residual < cfg.steady_eps)) {
    throw NonConvergenceError("direct steady-state solve residual " + std::to_string(residual) +
                                  " exceeds steady_eps",
                              residual);
  }
  return {std::move(x), residual, 0.0};
}

}  // namespace

SteadyStateResult steady_state(const Generator& L, const SolverConfig& cfg,
                               const std::optional<CollectiveState>& guess) {
  cfg.validate();
  CollectiveState x0 = guess ? *guess
                             : product_state(Eigen::MatrixXcd::Identity(L.basis().levels(), L.basis().levels()) /
                                                 static_cast<double>(L.basis().levels()),
                                             L.basis_ptr());
  check_dims(x0, L.basis());
  if (cfg.steady_method == SteadyMethod::Direct) return steady_direct(L, cfg, x0);
  return steady_marching(L, cfg, x0);
}

Correlation correlation_function(const CollectiveState& std_state, const Generator& L, int l, int lp,
                                 const SolverConfig& cfg, const CorrelationOptions& copt) {
  cfg.validate();
  check_dims(std_state, L.basis());
  if (!(copt.dtau > 0.0)) throw ValidationError("correlation sample spacing must be positive");
  const CollectiveState seed = regression_initial(std_state, l, lp);
  const auto functional = readout_functional(L.basis(), {{l, lp}});

  Correlation out;
  const Reduced red = reduce(L.matrix(), seed.values, cfg.restrict_support);
  const SparseMatrix& a = red.active ? red.matrix : L.matrix();

  // functional on the evolved index set
  std::vector<std::pair<std::size_t, cplx>> w;
  if (red.active) {
    for (const auto& [idx, c] : functional) {
      const auto it = std::lower_bound(red.keep.begin(), red.keep.end(), static_cast<std::uint32_t>(idx));
      if (it != red.keep.end() && *it == idx) w.emplace_back(static_cast<std::size_t>(it - red.keep.begin()), c);
    }
  } else {
    for (const auto& [idx, c] : functional) w.emplace_back(idx, c);
  }
  auto read = [&w](std::span<const cplx> y) {
    cplx g = 0.0;
    for (const auto& [i, c] : w) g += c * y[i];
    return g;
  };

  const auto y0 = red.gather(seed.values);
  const cplx g0 = read(y0);
  out.tau.push_back(0.0);
  out.g.push_back(g0);
  if (std::abs(g0) == 0.0 || inf_norm(y0) == 0.0) return out;

  Dopri5 integ([&a](double, std::span<const cplx> y, std::span<cplx> dy) { a.apply(y, dy); }, a.dim(),
               integrator_options(cfg), tolerance_scale(L.basis(), red, cfg));
  integ.reset(0.0, y0);
  const double threshold = copt.decay_threshold * std::abs(g0);
  std::size_t k = 0;
  std::vector<double> chunk(std::max<std::size_t>(copt.chunk, 2));
  while (true) {
    for (std::size_t j = 0; j < chunk.size(); ++j) chunk[j] = static_cast<double>(k + j + 1) * copt.dtau;
    double peak = 0.0;
    integ.integrate_grid(chunk, [&](std::size_t, double t, std::span<const cplx> y) {
      const cplx g = read(y);
      out.tau.push_back(t);
      out.g.push_back(g);
      peak = std::max(peak, std::abs(g));
    });
    k += chunk.size();
    if (peak < threshold) break;
    if (out.tau.back() >= cfg.t_max) {
      out.truncated = true;
      break;
    }
  }
  return out;
}

std::vector<double> fourier_real(const Correlation& c, std::span<const double> omegas) {
  std::vector<double> out(omegas.size(), 0.0);
  const std::size_t n = c.tau.size();
  if (n < 2) return out;
  for (std::size_t w = 0; w < omegas.size(); ++w) {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double dt = c.tau[k + 1] - c.tau[k];
      const cplx f0 = c.g[k] * std::polar(1.0, -omegas[w] * c.tau[k]);
      const cplx f1 = c.g[k + 1] * std::polar(1.0, -omegas[w] * c.tau[k + 1]);
      acc += 0.5 * dt * (f0 + f1).real();
    }
    out[w] = acc;
  }
  return out;
}

double spectrum_step(std::span<const double> omegas, double max_dtau) {
  double wmax = 0.0;
  for (double w : omegas) wmax = std::max(wmax, std::abs(w));
  double dt = wmax > 0.0 ? M_PI / wmax : max_dtau;
  if (max_dtau > 0.0) dt = std::min(dt, max_dtau);
  return dt;
}

Spectrum spectrum(const CollectiveState& std_state, const Generator& L, const CollectiveRates& r, int l, int lp,
                  std::span<const double> omegas, const SolverConfig& cfg, double max_dtau) {
  if (omegas.empty()) throw ValidationError("frequency grid is empty");
  Spectrum s;
  s.omegas.assign(omegas.begin(), omegas.end());
  const double gamma = r.Gamma(l, lp);
  CorrelationOptions copt;
  copt.dtau = spectrum_step(omegas, max_dtau);
  const auto corr = correlation_function(std_state, L, l, lp, cfg, copt);
  s.values = fourier_real(corr, omegas);
  for (auto& v : s.values) v *= gamma;
  if (corr.truncated) {
    s.truncated = true;
    // tail bounded by |g(T)| / decay rate estimated from the last half of the samples
    const std::size_t n = corr.g.size();
    const double g_end = std::abs(corr.g.back());
    const double g_mid = std::abs(corr.g[n / 2]);
    const double span = corr.tau.back() - corr.tau[n / 2];
    const double rate = (g_mid > g_end && span > 0.0) ? std::log(g_mid / g_end) / span : 0.0;
    s.truncation_bound = rate > 0.0 ? gamma * g_end / rate : std::numeric_limits<double>::infinity();
  }
  return s;
}

Spectrum emission_spectrum(const CollectiveState& std_state, const Generator& L, const CollectiveRates& r,
                           std::span<const double> omegas, const SolverConfig& cfg, double max_dtau) {
  Spectrum total;
  total.omegas.assign(omegas.begin(), omegas.end());
  total.values.assign(omegas.size(), 0.0);
  const int s = L.basis().levels();
  for (int l = 0; l < s; ++l) {
    for (int lp = 0; lp < l; ++lp) {
      if (r.Gamma(l, lp) == 0.0) continue;
      const auto part = spectrum(std_state, L, r, l, lp, omegas, cfg, max_dtau);
      for (std::size_t k = 0; k < omegas.size(); ++k) total.values[k] += part.values[k];
      total.truncated = total.truncated || part.truncated;
      total.truncation_bound += part.truncation_bound;
    }
  }
  return total;
}

}  // namespace superrad
