#include "superrad/model.hpp"

#include <cmath>
#include <string>

#include "superrad/error.hpp"

namespace superrad {

namespace {

std::string pair_name(const char* what, int l, int lp) {
  return std::string(what) + "(" + std::to_string(l) + "," + std::to_string(lp) + ")";
}

template <typename M>
void check_shape(const M& m, int s, const char* what) {
  if (m.rows() != s || m.cols() != s) {
    throw ValidationError(std::string(what) + " must be " + std::to_string(s) + "x" + std::to_string(s));
  }
}

// Entries must vanish where the quantity is undefined (l <= l', or l == l').
template <typename M>
void check_lower_only(const M& m, const char* what) {
  for (int l = 0; l < m.rows(); ++l)
    for (int lp = l; lp < m.cols(); ++lp)
      if (std::abs(m(l, lp)) != 0.0) throw ValidationError(pair_name(what, l, lp) + " is defined only for l > l'");
}

void check_non_negative(const Eigen::MatrixXd& m, const char* what) {
  for (int l = 0; l < m.rows(); ++l)
    for (int lp = 0; lp < m.cols(); ++lp)
      if (!(m(l, lp) >= 0.0)) throw ValidationError(pair_name(what, l, lp) + " must be >= 0");
}

}  // namespace

SystemParams SystemParams::zeros(int levels, int atoms) {
  SystemParams p;
  p.levels = levels;
  p.atoms = atoms;
  p.omega.assign(levels, 0.0);
  p.drive = Eigen::MatrixXcd::Zero(levels, levels);
  p.gamma = Eigen::MatrixXd::Zero(levels, levels);
  p.xi = Eigen::MatrixXd::Zero(levels, levels);
  p.cavity = DirectRates{Eigen::MatrixXd::Zero(levels, levels), Eigen::MatrixXd::Zero(levels, levels)};
  return p;
}

void SystemParams::validate() const {
  const int s = levels;
  if (s < 2) throw ValidationError("levels must be >= 2");
  if (atoms < 1) throw ValidationError("atoms must be >= 1");
  if (static_cast<int>(omega.size()) != s) throw ValidationError("omega needs one entry per level");
  check_shape(drive, s, "drive");
  check_shape(gamma, s, "gamma");
  check_shape(xi, s, "xi");
  check_lower_only(drive, "drive");
  check_lower_only(xi, "xi");
  check_non_negative(gamma, "gamma");
  check_non_negative(xi, "xi");
  for (int l = 0; l < s; ++l)
    if (gamma(l, l) != 0.0) throw ValidationError(pair_name("gamma", l, l) + " is undefined");
  if (!frame_rungs.empty() && static_cast<int>(frame_rungs.size()) != s) {
    throw ValidationError("frame_rungs needs one entry per level");
  }
  if (const auto* d = std::get_if<DirectRates>(&cavity)) {
    check_shape(d->Gamma, s, "Gamma");
    check_shape(d->Omega, s, "Omega");
    check_lower_only(d->Gamma, "Gamma");
    check_lower_only(d->Omega, "Omega");
    check_non_negative(d->Gamma, "Gamma");
  } else {
    const auto& c = std::get<CavityCoupling>(cavity);
    check_shape(c.g, s, "g");
    check_lower_only(c.g, "g");
    if (!(c.kappa >= 0.0)) throw ValidationError("kappa must be >= 0");
  }
}

int SystemParams::rung(int level) const { return frame_rungs.empty() ? level : frame_rungs[level]; }

double SystemParams::frame_frequency(int level) const {
  return frame == Frame::Rotating ? omega[level] - rung(level) * omega_d : omega[level];
}

bool SystemParams::has_drive() const {
  for (int l = 0; l < drive.rows(); ++l)
    for (int lp = 0; lp < drive.cols(); ++lp)
      if (std::abs(drive(l, lp)) != 0.0) return true;
  return false;
}

CollectiveRates derive_collective_rates(const SystemParams& p) {
  p.validate();
  const int s = p.levels;
  CollectiveRates r;
  if (const auto* d = std::get_if<DirectRates>(&p.cavity)) {
    r.Gamma = d->Gamma;
    r.Omega = d->Omega;
    r.chi = Eigen::MatrixXd::Zero(s, s);
    r.chi_set = false;
    return r;
  }
  const auto& c = std::get<CavityCoupling>(p.cavity);
  if (c.kappa <= 0.0) {
    throw SingularEliminationError("adiabatic elimination needs kappa > 0 when couplings are explicit");
  }
  r.Gamma = Eigen::MatrixXd::Zero(s, s);
  r.Omega = Eigen::MatrixXd::Zero(s, s);
  r.chi = Eigen::MatrixXd::Zero(s, s);
  r.chi_set = true;
  const double half_kappa = 0.5 * c.kappa;
  for (int l = 0; l < s; ++l) {
    for (int lp = 0; lp < l; ++lp) {
      const double chi = p.omega[l] - p.omega[lp] - c.omega_c;
      const double g2 = std::norm(c.g(l, lp));
      const double denom = chi * chi + half_kappa * half_kappa;
      r.chi(l, lp) = chi;
      r.Gamma(l, lp) = g2 * half_kappa / denom;
      r.Omega(l, lp) = c.lamb_shift_sign * g2 * chi / denom;
    }
  }
  return r;
}

DetunedRates rates_from_detuning_ratio(double gamma0, double alpha, double lamb_shift_sign) {
  const double d = alpha * alpha + 1.0;
  return {gamma0 / d, lamb_shift_sign * gamma0 * alpha / d};
}

}  // namespace superrad
