#include "superrad/observables.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "superrad/algebra.hpp"
#include "superrad/error.hpp"

namespace superrad {

namespace {

constexpr double kRadicandClamp = 1e-10;

// C * v, falling back to the log form when C overflows a double.
cplx weighted(double c, double log_c, cplx v) {
  if (std::isfinite(c)) return c * v;
  if (v == cplx{0.0, 0.0}) return v;
  return std::polar(std::exp(log_c + std::log(std::abs(v))), std::arg(v));
}

void check_level(const CollectiveState& x, int l) {
  if (l < 0 || l >= x.levels()) throw ValidationError("level " + std::to_string(l) + " out of range");
}

void require_two_level(const CollectiveState& x) {
  if (x.levels() != 2) throw UnsupportedError("angular momentum readouts are defined for two-level atoms only");
}

}  // namespace

cplx expectation(const CollectiveState& x, const OperatorProduct& ops) {
  const Basis& basis = *x.basis;
  for (const auto& [a, b] : ops) {
    check_level(x, a);
    check_level(x, b);
  }
  const auto& diag = basis.diagonal_subbasis();
  const auto& logc = basis.diagonal_log_multiplicity();
  const auto& mult = basis.diagonal_multiplicity();
  FormalSum cur, nxt;
  cplx total = 0.0;
  for (std::size_t k = 0; k < diag.size(); ++k) {
    cur.assign(1, FormalTerm{basis.occupations_of(diag[k]), 1.0});
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
      nxt.clear();
      algebra::left(it->first, it->second, cur, 1.0, nxt);
      std::swap(cur, nxt);
    }
    cplx v = 0.0;
    for (const auto& t : cur) v += t.coef * x.values[basis.rank(t.n)];
    total += weighted(mult[k], logc[k], v);
  }
  return total;
}

std::vector<std::pair<BasisIndex, cplx>> readout_functional(const Basis& basis, const OperatorProduct& ops) {
  for (const auto& [a, b] : ops) {
    if (a < 0 || a >= basis.levels() || b < 0 || b >= basis.levels()) throw ValidationError("level out of range");
  }
  const auto& diag = basis.diagonal_subbasis();
  const auto& logc = basis.diagonal_log_multiplicity();
  const auto& mult = basis.diagonal_multiplicity();
  std::vector<std::pair<BasisIndex, cplx>> w;
  FormalSum cur, nxt;
  for (std::size_t k = 0; k < diag.size(); ++k) {
    cur.assign(1, FormalTerm{basis.occupations_of(diag[k]), 1.0});
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
      nxt.clear();
      algebra::left(it->first, it->second, cur, 1.0, nxt);
      std::swap(cur, nxt);
    }
    for (const auto& t : cur) w.emplace_back(basis.rank(t.n), weighted(mult[k], logc[k], t.coef));
  }
  std::sort(w.begin(), w.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < w.size();) {
    auto idx = w[i].first;
    cplx sum = 0.0;
    for (; i < w.size() && w[i].first == idx; ++i) sum += w[i].second;
    w[out++] = {idx, sum};
  }
  w.resize(out);
  return w;
}

double trace(const CollectiveState& x) { return expectation(x, {}).real(); }

double hermitian_defect(const CollectiveState& x) {
  const Basis& basis = *x.basis;
  double worst = 0.0;
  Occupation n = basis.first();
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const auto j = basis.rank(n.transposed());
    worst = std::max(worst, std::abs(x.values[i] - std::conj(x.values[j])));
    basis.next(n);
  }
  return worst;
}

double population(const CollectiveState& x, int l) {
  check_level(x, l);
  return expectation(x, {{l, l}}).real();
}

cplx polarization(const CollectiveState& x, int l, int lp) {
  check_level(x, l);
  check_level(x, lp);
  return expectation(x, {{l, lp}});
}

Intensity intensity(const CollectiveState& x, const CollectiveRates& r) {
  Intensity out;
  const int s = x.levels();
  for (int l = 0; l < s; ++l) {
    for (int lp = 0; lp < l; ++lp) {
      const double g = r.Gamma(l, lp);
      if (g == 0.0) continue;
      out.total += g * expectation(x, {{l, lp}, {lp, l}}).real();
      out.individual += g * population(x, l);
    }
  }
  out.collective = out.total - out.individual;
  return out;
}

std::array<double, 3> angular_momentum(const CollectiveState& x) {
  require_two_level(x);
  const cplx c10 = polarization(x, 1, 0);
  const cplx c01 = polarization(x, 0, 1);
  const cplx i{0.0, 1.0};
  return {((c10 + c01) / 2.0).real(), (-i * (c10 - c01) / 2.0).real(),
          (population(x, 1) - population(x, 0)) / 2.0};
}

std::array<double, 3> angular_momentum_squares(const CollectiveState& x) {
  require_two_level(x);
  const auto e = [&](int a, int b, int c, int d) { return expectation(x, {{a, b}, {c, d}}); };
  const cplx pp = e(1, 0, 1, 0), pm = e(1, 0, 0, 1), mp = e(0, 1, 1, 0), mm = e(0, 1, 0, 1);
  const cplx jx2 = (pp + pm + mp + mm) / 4.0;
  const cplx jy2 = -(pp - pm - mp + mm) / 4.0;
  const cplx jz2 = (e(1, 1, 1, 1) - e(1, 1, 0, 0) - e(0, 0, 1, 1) + e(0, 0, 0, 0)) / 4.0;
  return {jx2.real(), jy2.real(), jz2.real()};
}

std::array<double, 3> angular_uncertainty(const CollectiveState& x) {
  const auto j = angular_momentum(x);
  const auto j2 = angular_momentum_squares(x);
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) {
    double rad = j2[k] - j[k] * j[k];
    if (rad < 0.0) {
      // absolute tolerance scaled to the size of the terms involved
      const double scale = std::max(1.0, std::abs(j2[k]));
      if (rad < -kRadicandClamp * scale) {
        throw ConsistencyError("negative variance " + std::to_string(rad) + " for angular momentum component " +
                               std::to_string(k));
      }
      rad = 0.0;
    }
    out[k] = std::sqrt(rad);
  }
  return out;
}

ObservableRecord observe(const CollectiveState& x, const CollectiveRates& r) {
  ObservableRecord rec;
  const int s = x.levels();
  rec.P.resize(s);
  for (int l = 0; l < s; ++l) rec.P[l] = population(x, l);
  rec.C = Eigen::MatrixXcd::Zero(s, s);
  for (int l = 0; l < s; ++l)
    for (int lp = 0; lp < s; ++lp)
      if (l != lp) rec.C(l, lp) = polarization(x, l, lp);
  const auto in = intensity(x, r);
  rec.I_ind = in.individual;
  rec.I_col = in.collective;
  rec.I_tot = in.total;
  if (s == 2) {
    rec.J = angular_momentum(x);
    rec.dJ = angular_uncertainty(x);
  }
  return rec;
}

PulseMetrics pulse_metrics(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size() || t.size() < 2) throw ValidationError("pulse_metrics needs at least two samples");
  const std::size_t n = y.size();
  const std::size_t k = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  PulseMetrics m;

  auto crossing = [&](std::size_t i, std::size_t j, double level) {
    // linear interpolation between samples i and j
    if (y[j] == y[i]) return t[i];
    return t[i] + (level - y[i]) * (t[j] - t[i]) / (y[j] - y[i]);
  };

  if (k == 0) {
    m.is_pulse = false;
    m.I_max = y[0];
    m.t0 = t[0];
    const double half = y[0] / 2.0;
    std::size_t j = 1;
    while (j < n && y[j] > half) ++j;
    if (j == n) {
      m.width_resolved = false;
      m.tau = t[n - 1] - t[0];
    } else {
      m.tau = crossing(j - 1, j, half) - t[0];
    }
    return m;
  }

  if (k + 1 < n) {
    // parabola through three samples, general spacing
    const double x0 = t[k - 1], x1 = t[k], x2 = t[k + 1];
    const double y0 = y[k - 1], y1 = y[k], y2 = y[k + 1];
    const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
    const double a = (d12 - d01) / (x2 - x0);
    if (a < 0.0) {
      const double b = d01 - a * (x0 + x1);
      const double c = y0 - a * x0 * x0 - b * x0;
      m.t0 = -b / (2.0 * a);
      m.I_max = c - b * b / (4.0 * a);
    } else {
      m.t0 = x1;
      m.I_max = y1;
    }
  } else {
    m.t0 = t[k];
    m.I_max = y[k];
  }

  const double half = m.I_max / 2.0;
  double left = t[0];
  {
    std::size_t j = k;
    while (j > 0 && y[j - 1] > half) --j;
    if (j == 0) {
      m.width_resolved = false;
    } else {
      left = crossing(j - 1, j, half);
    }
  }
  double right = t[n - 1];
  {
    std::size_t j = k;
    while (j + 1 < n && y[j + 1] > half) ++j;
    if (j + 1 == n) {
      m.width_resolved = false;
    } else {
      right = crossing(j, j + 1, half);
    }
  }
  m.tau = right - left;
  return m;
}

PulseMetrics pulse_metrics(const Trajectory& traj) {
  std::vector<double> y;
  y.reserve(traj.observables.size());
  for (const auto& o : traj.observables) y.push_back(o.I_tot);
  if (y.size() != traj.times.size()) throw ValidationError("trajectory has no recorded intensity");
  return pulse_metrics(traj.times, y);
}

}  // namespace superrad
