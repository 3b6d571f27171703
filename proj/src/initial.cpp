#include "superrad/initial.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "superrad/algebra.hpp"
#include "superrad/error.hpp"

namespace superrad {

namespace {
constexpr double kNormTolerance = 1e-12;
}

InitialStateSpec InitialStateSpec::bloch(double theta, double phi) {
  PureComponent c;
  c.probability = 1.0;
  c.amplitudes = {std::cos(theta / 2.0), std::sin(theta / 2.0) * std::polar(1.0, phi)};
  return InitialStateSpec{{c}};
}

InitialStateSpec InitialStateSpec::pure_level(int levels, int level) {
  if (level < 0 || level >= levels) throw ValidationError("level " + std::to_string(level) + " out of range");
  PureComponent c;
  c.amplitudes.assign(levels, 0.0);
  c.amplitudes[level] = 1.0;
  return InitialStateSpec{{c}};
}

void InitialStateSpec::validate(int levels) const {
  if (components.empty()) throw ValidationError("initial state needs at least one component");
  double total = 0.0;
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    if (!(c.probability >= 0.0 && c.probability <= 1.0)) {
      throw ValidationError("component " + std::to_string(i) + ": probability must lie in [0, 1]");
    }
    if (static_cast<int>(c.amplitudes.size()) != levels) {
      throw ValidationError("component " + std::to_string(i) + ": expected " + std::to_string(levels) +
                            " amplitudes");
    }
    double norm = 0.0;
    for (const auto& a : c.amplitudes) norm += std::norm(a);
    if (std::abs(norm - 1.0) > kNormTolerance) {
      throw ValidationError("component " + std::to_string(i) + ": amplitudes not normalised (sum |c|^2 = " +
                            std::to_string(norm) + ")");
    }
    total += c.probability;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw ValidationError("probabilities sum to " + std::to_string(total) + ", expected 1");
  }
}

Eigen::MatrixXcd InitialStateSpec::single_atom_density(int levels) const {
  validate(levels);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(levels, levels);
  for (const auto& c : components)
    for (int a = 0; a < levels; ++a)
      for (int b = 0; b < levels; ++b) rho(a, b) += c.probability * c.amplitudes[a] * std::conj(c.amplitudes[b]);
  for (int a = 0; a < levels; ++a) {
    double d = rho(a, a).real();
    if (d < 0.0) {
      std::clog << "warning: clamping single-atom population " << d << " of level " << a << " to 0\n";
      d = 0.0;
    }
    rho(a, a) = d;
  }
  return rho;
}

CollectiveState product_state(const Eigen::MatrixXcd& rho1, std::shared_ptr<const Basis> basis) {
  const int s = basis->levels();
  const int atoms = basis->atoms();
  if (rho1.rows() != s || rho1.cols() != s) throw ValidationError("single-atom density has wrong shape");

  // powers[(a*s+b)*(N+1)+k] = <b|rho1|a>^k, 0^0 = 1
  const auto stride = static_cast<std::size_t>(atoms + 1);
  std::vector<cplx> powers(static_cast<std::size_t>(s * s) * stride);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) {
      const cplx base = rho1(b, a);
      cplx* row = &powers[static_cast<std::size_t>(a * s + b) * stride];
      row[0] = 1.0;
      for (int k = 1; k <= atoms; ++k) row[k] = row[k - 1] * base;
    }
  }

  CollectiveState x{basis, std::vector<cplx>(basis->size())};
  Occupation n = basis->first();
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    cplx v = 1.0;
    for (int b = 0; b < s * s && v != cplx{0.0, 0.0}; ++b)
      v *= powers[static_cast<std::size_t>(b) * stride + n.flat(b)];
    x.values[i] = v;
    basis->next(n);
  }
  return x;
}

CollectiveState initial_state(const InitialStateSpec& spec, std::shared_ptr<const Basis> basis) {
  const Eigen::MatrixXcd rho1 = spec.single_atom_density(basis->levels());
  return product_state(rho1, std::move(basis));
}

CollectiveState initial_state(const InitialStateSpec& spec, int atoms, int levels) {
  return initial_state(spec, std::make_shared<const Basis>(atoms, levels));
}

CollectiveState regression_initial(const CollectiveState& std_state, int l, int lp) {
  const Basis& basis = *std_state.basis;
  const int s = basis.levels();
  if (l < 0 || l >= s || lp < 0 || lp >= s) {
    throw ValidationError("transition (" + std::to_string(l) + "," + std::to_string(lp) + ") out of level range");
  }
  CollectiveState seed{std_state.basis, std::vector<cplx>(basis.size())};
  FormalSum out;
  Occupation n = basis.first();
  for (std::size_t i = 0; i < seed.values.size(); ++i) {
    out.clear();
    algebra::right(lp, l, FormalTerm{n, 1.0}, 1.0, out);
    cplx v = 0.0;
    for (const auto& t : out) v += t.coef * std_state.values[basis.rank(t.n)];
    seed.values[i] = v;
    basis.next(n);
  }
  return seed;
}

}  // namespace superrad
