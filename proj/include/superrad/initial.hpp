#pragma once

// Initial collective states built from an uncorrelated mixture of
// identical single-atom pure states.

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "superrad/state.hpp"

namespace superrad {

struct PureComponent {
  double probability = 1.0;
  std::vector<cplx> amplitudes;  ///< c[l], one per level
};

struct InitialStateSpec {
  std::vector<PureComponent> components;

  /// Two-level state c1 = sin(theta/2) e^{i phi}, c0 = cos(theta/2).
  static InitialStateSpec bloch(double theta, double phi = 0.0);
  /// Every atom in `level` (|level><level|).
  static InitialStateSpec pure_level(int levels, int level);

  /// Throws ValidationError unless the probabilities and every amplitude
  /// vector are normalised within 1e-12 and shapes agree with `levels`.
  void validate(int levels) const;

  /// Single-atom density matrix rho1(a, b) = <a|rho|b> = sum_i m_i c_a c_b^*.
  Eigen::MatrixXcd single_atom_density(int levels) const;
};

/// <n>_0 = prod_{a,b} <b|rho1|a>^{n_ab} with 0^0 = 1.
CollectiveState initial_state(const InitialStateSpec& spec, std::shared_ptr<const Basis> basis);
CollectiveState initial_state(const InitialStateSpec& spec, int atoms, int levels);

/// Collective values of rho1^{(x)N} for an arbitrary single-atom density matrix.
CollectiveState product_state(const Eigen::MatrixXcd& rho1, std::shared_ptr<const Basis> basis);

/// Regression seed for the (l, l') transition: values of sigma_l'l rho_std,
/// i.e. <n> -> sum_k n_kl' <n_kl' - 1, n_kl + 1>_std. Not trace normalised.
CollectiveState regression_initial(const CollectiveState& std_state, int l, int lp);

}  // namespace superrad
