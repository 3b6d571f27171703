#pragma once

// Physical parameters of N identical s-level atoms coupled to a lossy
// cavity mode that has been eliminated adiabatically.
//
// Conventions (hbar = 1). Every frequency and rate is a plain double in a
// consistent, user chosen unit system; the configuration layer offers
// "units of Gamma_10" as a convenience.
//
//  omega[l]        level frequency
//  drive(l, l')    complex drive amplitude v0 for l > l'; H_d = v sigma_ll' + h.c.
//                  with v = v0 exp(-i omega_d t)
//  gamma(l, l')    individual rate from l to l' (decay for l > l', pump for l < l')
//  xi(l, l')       dephasing of the l-l' pair, l > l'
//  Gamma(l, l')    collective decay, l > l'
//  Omega(l, l')    collective Lamb shift, l > l'

#include <Eigen/Dense>
#include <variant>
#include <vector>

namespace superrad {

enum class Frame {
  /// Rotating at omega_d; the generator is time independent.
  Rotating,
  /// No frame transformation; a drive makes the generator time dependent.
  Lab,
};

struct CavityCoupling {
  Eigen::MatrixXcd g;  ///< g(l, l'), l > l'
  double kappa = 0.0;
  double omega_c = 0.0;
  /// +1 reproduces Omega = |g|^2 chi / (chi^2 + kappa^2/4); -1 flips it.
  double lamb_shift_sign = 1.0;
};

struct DirectRates {
  Eigen::MatrixXd Gamma;
  Eigen::MatrixXd Omega;
};

struct SystemParams {
  int levels = 2;
  int atoms = 1;
  std::vector<double> omega;
  Eigen::MatrixXcd drive;
  double omega_d = 0.0;
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd xi;
  std::variant<DirectRates, CavityCoupling> cavity;
  Frame frame = Frame::Rotating;
  /// Rung r_l of each level in the rotating frame: level l rotates at
  /// r_l * omega_d. Empty means r_l = l (ladder).
  std::vector<int> frame_rungs;

  /// Zero-filled parameters of the right shape with direct (zero) rates.
  static SystemParams zeros(int levels, int atoms);

  /// Throws ValidationError on shape mismatch, negative rates, or entries
  /// on pairs where they are undefined.
  void validate() const;

  int rung(int level) const;
  /// omega_l in the active frame (omega_l - r_l omega_d when rotating).
  double frame_frequency(int level) const;

  bool has_drive() const;
};

struct CollectiveRates {
  Eigen::MatrixXd Gamma;
  Eigen::MatrixXd Omega;
  Eigen::MatrixXd chi;
  bool chi_set = false;
};

/// Gamma = |g|^2 (kappa/2) / (chi^2 + (kappa/2)^2),
/// Omega = sign |g|^2 chi / (chi^2 + (kappa/2)^2), chi = omega_l - omega_l' - omega_c.
/// With direct rates the values are passed through and chi is left unset.
CollectiveRates derive_collective_rates(const SystemParams& p);

/// Resonant-normalised detuning parameterisation with alpha = 2 chi / kappa:
/// Gamma = Gamma0 / (alpha^2 + 1), Omega = sign Gamma0 alpha / (alpha^2 + 1).
struct DetunedRates {
  double Gamma;
  double Omega;
};
DetunedRates rates_from_detuning_ratio(double gamma0, double alpha, double lamb_shift_sign = 1.0);

}  // namespace superrad
