#pragma once

// Time evolution, steady states and two-time correlations in the
// collective representation.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "superrad/generator.hpp"
#include "superrad/observables.hpp"
#include "superrad/state.hpp"

namespace superrad {

enum class SteadyMethod { TimeMarching, Direct };

struct SolverConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.0;  ///< 0 means unbounded
  double steady_eps = 1e-10;
  double t_max = 1e4;
  std::size_t max_steps = 10'000'000;
  /// Evolve only the entries reachable from the initial support.
  bool restrict_support = true;
  /// Scale abs_tol by 1 / multiplicity so that class-summed values are
  /// controlled uniformly.
  bool multiplicity_scaled_tolerance = true;
  SteadyMethod steady_method = SteadyMethod::TimeMarching;

  void validate() const;
};

struct EvolveOptions {
  bool keep_states = true;
  /// When set, an ObservableRecord is stored for every grid point.
  const CollectiveRates* rates = nullptr;
  /// Called for every grid point after the state is available.
  std::function<void(double, const CollectiveState&)> observer;
};

Trajectory evolve(const CollectiveState& x0, const Generator& L, std::span<const double> grid,
                  const SolverConfig& cfg, const EvolveOptions& opts = {});

/// Drive coefficient f(t) of the lab-frame generator.
using DriveCoefficient = std::function<cplx(double)>;

Trajectory evolve(const CollectiveState& x0, const LabFrameGenerator& L, const DriveCoefficient& f,
                  std::span<const double> grid, const SolverConfig& cfg, const EvolveOptions& opts = {});

struct SteadyStateResult {
  CollectiveState state;
  double residual = 0.0;  ///< ||L x||_inf / ||x||_inf
  double time = 0.0;      ///< marching time used (0 for the direct route)
};

/// Throws NonConvergenceError when the residual stays above steady_eps up
/// to t_max. Without a guess the maximally mixed product state is used.
SteadyStateResult steady_state(const Generator& L, const SolverConfig& cfg,
                               const std::optional<CollectiveState>& guess = std::nullopt);

/// ||L x||_inf / ||x||_inf
double steady_residual(const Generator& L, const CollectiveState& x);

struct Correlation {
  std::vector<double> tau;
  std::vector<cplx> g;
  bool truncated = false;  ///< |g| did not decay below the threshold by t_max
};

struct CorrelationOptions {
  double dtau = 0.0;               ///< sample spacing (required > 0)
  double decay_threshold = 1e-6;   ///< stop once max |g| over a chunk < threshold * |g(0)|
  std::size_t chunk = 64;          ///< samples per decay check
};

/// g(tau) = tr{sigma_ll' rho~(tau)} with rho~(0) = sigma_l'l rho_std.
Correlation correlation_function(const CollectiveState& std_state, const Generator& L, int l, int lp,
                                 const SolverConfig& cfg, const CorrelationOptions& copt);

struct Spectrum {
  std::vector<double> omegas;
  std::vector<double> values;
  bool truncated = false;
  double truncation_bound = 0.0;  ///< bound on |error| of each value when truncated
};

/// Re int_0^T g(tau) e^{-i omega tau} dtau by the trapezoid rule (no rate factor).
std::vector<double> fourier_real(const Correlation& c, std::span<const double> omegas);

/// Sampling step for a frequency grid: pi / max |omega|, capped by max_dtau.
double spectrum_step(std::span<const double> omegas, double max_dtau);

/// Gamma_ll' Re int g_ll'(tau) e^{-i omega tau} dtau for a single transition.
Spectrum spectrum(const CollectiveState& std_state, const Generator& L, const CollectiveRates& r, int l, int lp,
                  std::span<const double> omegas, const SolverConfig& cfg, double max_dtau = 0.1);

/// Sum of spectrum() over all transitions l > l' with Gamma_ll' > 0.
Spectrum emission_spectrum(const CollectiveState& std_state, const Generator& L, const CollectiveRates& r,
                           std::span<const double> omegas, const SolverConfig& cfg, double max_dtau = 0.1);

/// Multiplicity of every basis element (as exp of the log value), in index order.
std::vector<double> log_multiplicities(const Basis& basis);

}  // namespace superrad
