#include "superrad/lorentz_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "superrad/error.hpp"

namespace superrad {

double Lorentzian::operator()(double w) const {
  const double x = (w - center) / (width / 2.0);
  return max / (1.0 + x * x);
}

namespace {

constexpr std::size_t kMinPoints = 32;
constexpr int kMaxIterations = 500;
constexpr double kDegenerateRatio = 1e-3;

// Peak guess from the tallest sample and linear half-maximum crossings.
Lorentzian guess(std::span<const double> w, const std::vector<double>& y) {
  const std::size_t n = y.size();
  const std::size_t k = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  Lorentzian l;
  l.max = y[k];
  l.center = w[k];
  const double half = y[k] / 2.0;
  std::size_t a = k, b = k;
  while (a > 0 && y[a] > half) --a;
  while (b + 1 < n && y[b] > half) ++b;
  auto cross = [&](std::size_t i, std::size_t j) {
    if (y[i] == y[j]) return w[i];
    return w[i] + (half - y[i]) * (w[j] - w[i]) / (y[j] - y[i]);
  };
  const double left = (y[a] <= half && a < k) ? cross(a, a + 1) : w[a];
  const double right = (y[b] <= half && b > k) ? cross(b - 1, b) : w[b];
  l.width = std::max(right - left, 2.0 * (w[std::min(k + 1, n - 1)] - w[k > 0 ? k - 1 : 0]) / 2.0);
  if (!(l.width > 0.0)) l.width = (w[n - 1] - w[0]) / static_cast<double>(n);
  return l;
}

template <int P>
struct LevMar {
  using Vec = Eigen::Matrix<double, P, 1>;
  using Mat = Eigen::Matrix<double, P, P>;
};

// Levenberg-Marquardt on k Lorentzians (3k parameters).
template <int P>
std::pair<Eigen::Matrix<double, P, 1>, int> levenberg_marquardt(std::span<const double> w, std::span<const double> y,
                                                                Eigen::Matrix<double, P, 1> x, bool& converged,
                                                                double& rms) {
  using Vec = typename LevMar<P>::Vec;
  using Mat = typename LevMar<P>::Mat;
  const std::size_t n = w.size();
  auto residuals = [&](const Vec& q, std::vector<double>& r, Eigen::Matrix<double, Eigen::Dynamic, P>* jac) {
    r.assign(n, 0.0);
    if (jac) jac->setZero(static_cast<Eigen::Index>(n), P);
    for (std::size_t i = 0; i < n; ++i) {
      double model = 0.0;
      for (int c = 0; c < P / 3; ++c) {
        const double a = q(3 * c), hw = q(3 * c + 1) / 2.0, ctr = q(3 * c + 2);
        const double u = (w[i] - ctr) / hw;
        const double den = 1.0 + u * u;
        model += a / den;
        if (jac) {
          (*jac)(i, 3 * c) = 1.0 / den;
          // d/d width with hw = width / 2
          (*jac)(i, 3 * c + 1) = a * 2.0 * u * u / (den * den) / q(3 * c + 1);
          (*jac)(i, 3 * c + 2) = a * 2.0 * u / (den * den) / hw;
        }
      }
      r[i] = model - y[i];
    }
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
  };

  std::vector<double> r, r_try;
  Eigen::Matrix<double, Eigen::Dynamic, P> jac(static_cast<Eigen::Index>(n), P);
  double cost = residuals(x, r, &jac);
  double lambda = 1e-3;
  converged = false;
  int it = 0;
  for (; it < kMaxIterations; ++it) {
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(n));
    const Mat jtj = jac.transpose() * jac;
    const Vec g = jac.transpose() * rv;
    bool improved = false;
    for (int inner = 0; inner < 30; ++inner) {
      Mat a = jtj;
      for (int k = 0; k < P; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-300);
      const Vec step = a.ldlt().solve(-g);
      Vec trial = x + step;
      for (int c = 0; c < P / 3; ++c) trial(3 * c + 1) = std::abs(trial(3 * c + 1));
      const double c_try = residuals(trial, r_try, nullptr);
      if (std::isfinite(c_try) && c_try < cost) {
        const double rel = (cost - c_try) / std::max(cost, 1e-300);
        x = trial;
        cost = c_try;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
        if (rel < 1e-14 || step.norm() < 1e-12 * (x.norm() + 1e-12)) converged = true;
        break;
      }
      lambda *= 4.0;
      if (lambda > 1e12) break;
    }
    if (!improved) {
      converged = true;
      break;
    }
    if (converged) break;
    cost = residuals(x, r, &jac);
  }
  rms = std::sqrt(cost / static_cast<double>(n));
  return {x, it};
}

}  // namespace

TwoLorentzianFit fit_two_lorentzians(std::span<const double> omega, std::span<const double> values) {
  if (omega.size() != values.size()) throw ValidationError("frequency and value arrays differ in length");
  if (omega.size() < kMinPoints) throw ValidationError("two-Lorentzian fit needs at least 32 points");
  const std::vector<double> y(values.begin(), values.end());

  const Lorentzian first = guess(omega, y);
  std::vector<double> rest(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) rest[i] = y[i] - first(omega[i]);
  const Lorentzian second = guess(omega, rest);

  TwoLorentzianFit out;
  const double ymax = *std::max_element(y.begin(), y.end());
  if (second.max > kDegenerateRatio * ymax) {
    Eigen::Matrix<double, 6, 1> x0;
    x0 << first.max, first.width, first.center, second.max, std::max(second.width, first.width * 2.0), second.center;
    bool conv = false;
    double rms = 0.0;
    auto [x, it] = levenberg_marquardt<6>(omega, values, x0, conv, rms);
    Lorentzian a{x(0), std::abs(x(1)), x(2)}, b{x(3), std::abs(x(4)), x(5)};
    if (a.width > b.width) std::swap(a, b);
    out.peak = a;
    out.background = b;
    out.residual = rms;
    out.iterations = it;
    out.converged = conv;
    out.degenerate = !(std::abs(b.max) > kDegenerateRatio * std::abs(a.max)) ||
                     !(std::abs(a.max) > kDegenerateRatio * std::abs(b.max));
    if (!out.degenerate) return out;
  }

  // single component
  Eigen::Matrix<double, 3, 1> x0;
  x0 << first.max, first.width, first.center;
  bool conv = false;
  double rms = 0.0;
  auto [x, it] = levenberg_marquardt<3>(omega, values, x0, conv, rms);
  out.peak = Lorentzian{x(0), std::abs(x(1)), x(2)};
  out.background = Lorentzian{0.0, 0.0, x(2)};
  out.residual = rms;
  out.iterations = it;
  out.converged = conv;
  out.degenerate = true;
  return out;
}

}  // namespace superrad
