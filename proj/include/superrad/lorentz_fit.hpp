#pragma once

// Least-squares fit of a sum of two Lorentzians
//   f(w) = sum_k A_k / (1 + ((w - c_k) / (width_k / 2))^2)
// with width_k the full width at half maximum.

#include <span>

namespace superrad {

struct Lorentzian {
  double max = 0.0;
  double width = 0.0;
  double center = 0.0;

  double operator()(double w) const;
};

struct TwoLorentzianFit {
  Lorentzian peak;        ///< narrower component
  Lorentzian background;  ///< broader component
  double residual = 0.0;  ///< root-mean-square residual
  int iterations = 0;
  bool converged = false;
  /// Second component negligible or not identifiable.
  bool degenerate = false;
};

/// Throws ValidationError for fewer than 32 points or mismatched spans.
TwoLorentzianFit fit_two_lorentzians(std::span<const double> omega, std::span<const double> values);

}  // namespace superrad
