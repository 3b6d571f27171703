#pragma once

// Physical readouts from collective states.
//
// Every readout is an expectation of a polynomial in collective operators
// S_ab = sum_j sigma^j_ab. Using the identity decomposition over diagonal
// classes d, tr{rho O} = sum_d C_d tr{rho O [d]}, and O [d] is expanded
// with the single-operator rules of algebra.hpp.

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "superrad/model.hpp"
#include "superrad/state.hpp"

namespace superrad {

/// Product S_{a1 b1} S_{a2 b2} ... (leftmost factor first).
using OperatorProduct = std::vector<std::pair<int, int>>;

struct ObservableRecord {
  std::vector<double> P;  ///< populations P_l
  Eigen::MatrixXcd C;     ///< polarizations C(l, l') = <S_ll'>
  double I_ind = 0.0;
  double I_col = 0.0;
  double I_tot = 0.0;
  std::optional<std::array<double, 3>> J;   ///< two-level only
  std::optional<std::array<double, 3>> dJ;  ///< two-level only
};

struct Intensity {
  double individual = 0.0;
  double collective = 0.0;
  double total = 0.0;
};

struct PulseMetrics {
  double I_max = 0.0;
  double t0 = 0.0;
  double tau = 0.0;
  bool is_pulse = true;        ///< false when the maximum sits at the first sample
  bool width_resolved = true;  ///< false when a half-maximum crossing lies outside the window
};

struct Trajectory {
  std::vector<double> times;
  std::vector<CollectiveState> states;
  std::vector<ObservableRecord> observables;
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

/// Expectation of a product of collective operators.
cplx expectation(const CollectiveState& x, const OperatorProduct& ops);

/// Sparse linear functional w with <O> = sum_i w_i <n_i>.
std::vector<std::pair<BasisIndex, cplx>> readout_functional(const Basis& basis, const OperatorProduct& ops);

/// Trace functional sum_d C_d <d>.
double trace(const CollectiveState& x);
/// max_n |<n> - conj(<n^T>)|.
double hermitian_defect(const CollectiveState& x);

double population(const CollectiveState& x, int l);
cplx polarization(const CollectiveState& x, int l, int lp);
Intensity intensity(const CollectiveState& x, const CollectiveRates& r);

/// (J_x, J_y, J_z); throws UnsupportedError unless s = 2.
std::array<double, 3> angular_momentum(const CollectiveState& x);
/// (<j_x^2>, <j_y^2>, <j_z^2>); throws UnsupportedError unless s = 2.
std::array<double, 3> angular_momentum_squares(const CollectiveState& x);
/// Delta J_i = sqrt(<j_i^2> - J_i^2). Radicands in [-1e-10, 0) are clamped;
/// more negative ones raise ConsistencyError.
std::array<double, 3> angular_uncertainty(const CollectiveState& x);

ObservableRecord observe(const CollectiveState& x, const CollectiveRates& r);

/// Peak, center and FWHM of a sampled series.
PulseMetrics pulse_metrics(std::span<const double> t, std::span<const double> intensity);
/// Uses the I_tot series of the recorded observables.
PulseMetrics pulse_metrics(const Trajectory& traj);

}  // namespace superrad
