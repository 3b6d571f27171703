#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "superrad/dynamics.hpp"
#include "superrad/error.hpp"
#include "superrad/initial.hpp"
#include "superrad/integrator.hpp"
#include "superrad/oracle.hpp"
#include "test_support.hpp"

using namespace superrad;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = a + (b - a) * k / (n - 1);
  return g;
}

SolverConfig tight() {
  SolverConfig c;
  c.rel_tol = 1e-10;
  c.abs_tol = 1e-12;
  return c;
}

SystemParams pumped_atom(double gamma10, double gamma01) {
  SystemParams p = SystemParams::zeros(2, 1);
  p.gamma(1, 0) = gamma10;
  p.gamma(0, 1) = gamma01;
  return p;
}

}  // namespace

TEST_CASE("integrator on a scalar exponential") {
  IntegratorOptions opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 1e-12;
  Dopri5 ode([](double, std::span<const cplx> y, std::span<cplx> dy) { dy[0] = cplx(-1.0, 2.0) * y[0]; }, 1, opt);
  const std::vector<cplx> y0{1.0};
  ode.reset(0.0, y0);
  const auto grid = linspace(0.1, 3.0, 30);
  double err = 0.0;
  ode.integrate_grid(grid, [&](std::size_t, double t, std::span<const cplx> y) {
    err = std::max(err, std::abs(y[0] - std::exp(cplx(-1.0, 2.0) * t)));
  });
  CHECK(err < 1e-9);
}

TEST_CASE("zero generator keeps the state") {
  std::mt19937 rng(1);
  const auto p = testing::random_params(3, 2, rng);
  const auto g = build_generator(p, derive_collective_rates(p), TermSet::none());
  const auto x0 = initial_state(InitialStateSpec::bloch(1.0, 0.5), g.basis_ptr());
  const auto grid = linspace(0.0, 5.0, 6);
  const auto traj = evolve(x0, g, grid, SolverConfig{});
  for (const auto& x : traj.states)
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == x0[i]);
}

TEST_CASE("single atom decay is exponential") {
  SystemParams p = SystemParams::zeros(2, 1);
  p.gamma(1, 0) = 1.3;
  const auto r = derive_collective_rates(p);
  const auto g = build_generator(p, r);
  const auto x0 = initial_state(InitialStateSpec::bloch(std::numbers::pi), g.basis_ptr());
  const auto grid = linspace(0.0, 5.0, 51);
  EvolveOptions opts;
  opts.rates = &r;
  const auto traj = evolve(x0, g, grid, tight(), opts);
  double err = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    err = std::max(err, std::abs(traj.observables[k].P[1] - std::exp(-1.3 * grid[k])));
  CHECK(err < 1e-8);
}

TEST_CASE("trajectory agrees with the full-space evolution") {
  std::mt19937 rng(19);
  for (auto [N, s] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {2, 3}}) {
    const auto p = testing::random_params(N, s, rng, 2.0);
    const auto r = derive_collective_rates(p);
    const auto basis = std::make_shared<const Basis>(N, s);
    const auto g = build_generator(basis, p, r);
    const auto spec = InitialStateSpec::pure_level(s, s - 1);
    const auto x0 = initial_state(spec, basis);
    const auto grid = linspace(0.0, 2.0, 11);
    const auto traj = evolve(x0, g, grid, tight());
    const auto full = oracle::full_evolve(oracle::product_density(spec.single_atom_density(s), N), p, r, grid, tight());
    double err = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto y = oracle::project_collective(full[k], basis, 1e-8);
      for (std::size_t i = 0; i < y.size(); ++i) err = std::max(err, std::abs(y[i] - traj.states[k][i]));
    }
    CHECK(err < 1e-8);
  }
}

TEST_CASE("lab-frame evolution agrees with the full-space evolution") {
  SystemParams p = SystemParams::zeros(2, 2);
  p.omega = {0.0, 3.0};
  p.omega_d = 2.5;
  p.drive(1, 0) = cplx(0.7, 0.2);
  p.gamma(1, 0) = 0.4;
  std::get<DirectRates>(p.cavity).Gamma(1, 0) = 0.8;
  p.frame = Frame::Lab;
  const auto r = derive_collective_rates(p);
  const auto basis = std::make_shared<const Basis>(2, 2);
  const auto lab = build_lab_frame_generator(basis, p, r);
  const auto x0 = initial_state(InitialStateSpec::bloch(0.0), basis);
  const auto grid = linspace(0.0, 3.0, 16);
  const double wd = p.omega_d;
  const auto traj = evolve(x0, lab, [wd](double t) { return std::polar(1.0, -wd * t); }, grid, tight());
  const auto full = oracle::full_evolve(oracle::product_density(InitialStateSpec::bloch(0.0).single_atom_density(2), 2),
                                        p, r, grid, tight());
  double err = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto y = oracle::project_collective(full[k], basis, 1e-8);
    for (std::size_t i = 0; i < y.size(); ++i) err = std::max(err, std::abs(y[i] - traj.states[k][i]));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("support restriction does not change the result") {
  const auto p = testing::superradiant_decay(12);
  const auto g = build_generator(p, derive_collective_rates(p));
  const auto x0 = initial_state(InitialStateSpec::bloch(std::numbers::pi), g.basis_ptr());
  const auto grid = linspace(0.0, 1.0, 5);
  SolverConfig a = tight(), b = tight();
  b.restrict_support = false;
  const auto ta = evolve(x0, g, grid, a), tb = evolve(x0, g, grid, b);
  double err = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i) err = std::max(err, std::abs(ta.states.back()[i] - tb.states.back()[i]));
  CHECK(err < 1e-9);
}

TEST_CASE("pumped single atom steady state") {
  const double g10 = 1.0, g01 = 0.35;
  const auto p = pumped_atom(g10, g01);
  const auto L = build_generator(p, derive_collective_rates(p));
  SolverConfig cfg;
  const auto marching = steady_state(L, cfg);
  CHECK(marching.residual < cfg.steady_eps);
  CHECK(population(marching.state, 1) == doctest::Approx(g01 / (g01 + g10)).epsilon(1e-8));
  cfg.steady_method = SteadyMethod::Direct;
  const auto direct = steady_state(L, cfg);
  CHECK(population(direct.state, 1) == doctest::Approx(g01 / (g01 + g10)).epsilon(1e-10));
}

TEST_CASE("steady state routes agree with each other and the full space") {
  std::mt19937 rng(23);
  for (auto [N, s] : std::vector<std::pair<int, int>>{{3, 2}, {2, 3}}) {
    const auto p = testing::random_params(N, s, rng, 2.0);
    const auto r = derive_collective_rates(p);
    const auto L = build_generator(p, r);
    SolverConfig cfg;
    const auto a = steady_state(L, cfg);
    cfg.steady_method = SteadyMethod::Direct;
    const auto b = steady_state(L, cfg);
    const auto ref = oracle::project_collective(oracle::full_steady_state(p, r), L.basis_ptr(), 1e-8);
    double ab = 0.0, br = 0.0;
    for (std::size_t i = 0; i < L.dim(); ++i) {
      ab = std::max(ab, std::abs(a.state[i] - b.state[i]));
      br = std::max(br, std::abs(b.state[i] - ref[i]));
    }
    CHECK(ab < 1e-7);
    CHECK(br < 1e-9);
  }
}

TEST_CASE("undamped coherences never become stationary") {
  SystemParams p = SystemParams::zeros(2, 2);
  p.omega = {0.0, 1.0};
  p.drive(1, 0) = 1.0;
  const auto L = build_generator(p, derive_collective_rates(p));
  SolverConfig cfg;
  cfg.t_max = 5.0;
  const auto x0 = initial_state(InitialStateSpec::bloch(1.0), L.basis_ptr());
  CHECK_THROWS_AS(steady_state(L, cfg, x0), NonConvergenceError);
}

TEST_CASE("two-time correlation agrees with the full space") {
  std::mt19937 rng(29);
  const int N = 2, s = 2;
  auto p = testing::random_params(N, s, rng, 2.0);
  const auto r = derive_collective_rates(p);
  const auto L = build_generator(p, r);
  const auto stdy = steady_state(L, SolverConfig{});
  CorrelationOptions copt;
  copt.dtau = 0.05;
  const auto corr = correlation_function(stdy.state, L, 1, 0, tight(), copt);
  const auto full_std = oracle::full_steady_state(p, r);
  const std::vector<double> grid(corr.tau.begin(), corr.tau.begin() + 40);
  const auto ref = oracle::full_two_time(full_std, p, r, 1, 0, grid, tight());
  double err = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) err = std::max(err, std::abs(ref[k] - corr.g[k]));
  CHECK(err < 1e-8);
}

TEST_CASE("single atom spectrum is a Lorentzian") {
  const double g10 = 1.0, g01 = 0.5;
  SystemParams p = SystemParams::zeros(2, 1);
  p.gamma(0, 1) = g01;
  std::get<DirectRates>(p.cavity).Gamma(1, 0) = g10;
  const auto r = derive_collective_rates(p);
  const auto L = build_generator(p, r);
  const auto stdy = steady_state(L, SolverConfig{});
  const double P1 = g01 / (g01 + g10), half = (g01 + g10) / 2.0;
  const auto omegas = linspace(-3.0, 3.0, 61);
  const auto spec = spectrum(stdy.state, L, r, 1, 0, omegas, tight(), 0.01);
  CHECK_FALSE(spec.truncated);
  double err = 0.0, peak = 0.0;
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const double exact = g10 * P1 * half / (half * half + omegas[k] * omegas[k]);
    err = std::max(err, std::abs(spec.values[k] - exact));
    peak = std::max(peak, exact);
  }
  CHECK(err < 1e-3 * peak);
}

TEST_CASE("spectrum step") {
  const std::vector<double> w{-10.0, 2.0};
  CHECK(spectrum_step(w, 1.0) == doctest::Approx(std::numbers::pi / 10.0));
  CHECK(spectrum_step(w, 0.1) == doctest::Approx(0.1));
}

TEST_CASE("solver configuration validation") {
  SolverConfig c;
  c.rel_tol = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = SolverConfig{};
  c.steady_eps = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("step budget exhaustion raises a stiffness error") {
  const auto p = testing::superradiant_decay(20);
  const auto L = build_generator(p, derive_collective_rates(p));
  const auto x0 = initial_state(InitialStateSpec::bloch(std::numbers::pi), L.basis_ptr());
  SolverConfig cfg;
  cfg.max_steps = 3;
  const auto grid = linspace(0.0, 5.0, 3);
  CHECK_THROWS_AS(evolve(x0, L, grid, cfg), StiffnessError);
}
