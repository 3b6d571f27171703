#pragma once

// Dormand-Prince 5(4) with FSAL, step-size control after Hairer,
// Norsett & Wanner, and the standard 4th order continuous extension.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "superrad/error.hpp"

namespace superrad {

struct IntegratorOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.0;      ///< 0 means unbounded
  double initial_step = 0.0;  ///< 0 selects automatically
  std::size_t max_steps = 10'000'000;
  /// Interpolate grid points from the continuous extension. When false,
  /// every grid point is hit by a step.
  bool dense_output = true;
};

class Dopri5 {
 public:
  using cplx = std::complex<double>;
  using Rhs = std::function<void(double t, std::span<const cplx> y, std::span<cplx> dy)>;

  /// atol_scale, when given, multiplies abs_tol per component.
  Dopri5(Rhs f, std::size_t n, IntegratorOptions opt, std::vector<double> atol_scale = {})
      : f_(std::move(f)), n_(n), opt_(opt), atol_(n, opt.abs_tol) {
    if (!atol_scale.empty()) {
      if (atol_scale.size() != n) throw ValidationError("atol_scale has wrong length");
      for (std::size_t i = 0; i < n; ++i) atol_[i] = opt.abs_tol * atol_scale[i];
    }
    if (!(opt_.rel_tol > 0.0) || !(opt_.abs_tol > 0.0)) throw ValidationError("tolerances must be positive");
    y_.resize(n);
    y1_.resize(n);
    tmp_.resize(n);
    for (auto& k : k_) k.resize(n);
  }

  void reset(double t0, std::span<const cplx> y0) {
    if (y0.size() != n_) throw ValidationError("initial state has wrong length");
    t_ = t0;
    std::copy(y0.begin(), y0.end(), y_.begin());
    f_(t_, y_, k_[0]);
    ++evaluations_;
    h_ = opt_.initial_step;
    started_ = true;
  }

  double time() const { return t_; }
  const std::vector<cplx>& state() const { return y_; }
  std::size_t steps() const { return accepted_; }
  std::size_t rejected() const { return rejected_; }
  std::size_t evaluations() const { return evaluations_; }
  double last_step() const { return h_; }

  /// Integrates to t_end, landing on it exactly.
  void advance_to(double t_end) {
    auto ignore = [](std::size_t, double, std::span<const cplx>) {};
    integrate(t_end, {}, ignore);
  }

  /// Integrates to grid.back(); obs(k, grid[k], y) is called for every grid
  /// point not before the current time, in order.
  template <typename Observer>
  void integrate_grid(std::span<const double> grid, Observer&& obs) {
    if (grid.empty()) return;
    integrate(grid.back(), grid, obs);
  }

  /// Single accepted step towards t_end (no overshoot).
  /// Returns false once t_end has been reached.
  bool step_towards(double t_end) {
    if (t_ >= t_end) return false;
    take_step(t_end);
    return true;
  }

 private:
  template <typename Observer>
  void integrate(double t_end, std::span<const double> grid, Observer& obs) {
    if (!started_) throw ValidationError("integrator used before reset");
    std::size_t next = 0;
    while (next < grid.size() && grid[next] < t_) ++next;
    while (next < grid.size() && grid[next] == t_) obs(next, grid[next], std::span<const cplx>(y_)), ++next;
    while (t_ < t_end) {
      const double target = (opt_.dense_output || next >= grid.size()) ? t_end : grid[next];
      const double t_old = t_;
      take_step(target, opt_.dense_output && next < grid.size());
      if (next < grid.size() && grid[next] <= t_) {
        while (next < grid.size() && grid[next] <= t_) {
          if (grid[next] == t_) {
            obs(next, grid[next], std::span<const cplx>(y_));
          } else {
            interpolate(t_old, grid[next]);
            obs(next, grid[next], std::span<const cplx>(tmp_));
          }
          ++next;
        }
      }
    }
  }

  double error_norm() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double sc = atol_[i] + opt_.rel_tol * std::max(std::abs(y_[i]), std::abs(y1_[i]));
      const double e = std::abs(tmp_[i]) / sc;
      acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(std::max<std::size_t>(n_, 1)));
  }

  double initial_step(double span) {
    // Hairer's starting step heuristic
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double sc = atol_[i] + opt_.rel_tol * std::abs(y_[i]);
      d0 += std::norm(y_[i]) / (sc * sc);
      d1 += std::norm(k_[0][i]) / (sc * sc);
    }
    d0 = std::sqrt(d0 / n_);
    d1 = std::sqrt(d1 / n_);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    if (opt_.max_step > 0.0) h0 = std::min(h0, opt_.max_step);
    for (std::size_t i = 0; i < n_; ++i) y1_[i] = y_[i] + h0 * k_[0][i];
    f_(t_ + h0, y1_, k_[1]);
    ++evaluations_;
    double d2 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double sc = atol_[i] + opt_.rel_tol * std::abs(y_[i]);
      d2 += std::norm(k_[1][i] - k_[0][i]) / (sc * sc);
    }
    d2 = std::sqrt(d2 / n_) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    double h = std::min(100.0 * h0, h1);
    h = std::min(h, span);
    if (opt_.max_step > 0.0) h = std::min(h, opt_.max_step);
    return h;
  }

  void stages(double h) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    auto& k1 = k_[0];
    auto& k2 = k_[1];
    auto& k3 = k_[2];
    auto& k4 = k_[3];
    auto& k5 = k_[4];
    auto& k6 = k_[5];
    auto& k7 = k_[6];
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) y1_[i] = y_[i] + h * a21 * k1[i];
    f_(t_ + c2 * h, y1_, k2);
    for (std::size_t i = 0; i < n; ++i) y1_[i] = y_[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f_(t_ + c3 * h, y1_, k3);
    for (std::size_t i = 0; i < n; ++i) y1_[i] = y_[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f_(t_ + c4 * h, y1_, k4);
    for (std::size_t i = 0; i < n; ++i)
      y1_[i] = y_[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f_(t_ + c5 * h, y1_, k5);
    for (std::size_t i = 0; i < n; ++i)
      y1_[i] = y_[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f_(t_ + h, y1_, k6);
    for (std::size_t i = 0; i < n; ++i)
      y1_[i] = y_[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f_(t_ + h, y1_, k7);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    evaluations_ += 6;
  }

  void take_step(double t_end, bool want_dense = false) {
    const double span = t_end - t_;
    if (h_ <= 0.0) h_ = initial_step(span);
    bool last_rejected = false;
    while (true) {
      if (accepted_ + rejected_ >= opt_.max_steps) {
        throw StiffnessError("maximum number of steps (" + std::to_string(opt_.max_steps) + ") exceeded at t = " +
                                 std::to_string(t_),
                             t_, h_);
      }
      double h = h_;
      if (opt_.max_step > 0.0) h = std::min(h, opt_.max_step);
      bool hits_end = false;
      if (t_ + h >= t_end || t_ + 1.0000001 * h >= t_end) {
        h = t_end - t_;
        hits_end = true;
      }
      if (h <= 1e-14 * std::max(1.0, std::abs(t_))) {
        throw StiffnessError("step size underflow (h = " + std::to_string(h) + ") at t = " + std::to_string(t_), t_,
                             h);
      }
      stages(h);
      const double err = error_norm();
      if (!std::isfinite(err)) {
        ++rejected_;
        h_ = 0.1 * h;
        last_rejected = true;
        continue;
      }
      if (err <= 1.0) {
        // accept; the 7th stage is the first stage of the next step
        double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (last_rejected) fac = std::min(fac, 1.0);
        if (want_dense) build_dense_coefficients(h);
        std::swap(y_, y1_);
        std::swap(k_[0], k_[6]);
        const double t_new = hits_end ? t_end : t_ + h;
        last_h_ = h;
        t_ = t_new;
        ++accepted_;
        // a step shortened to land on t_end does not shrink the proposal
        h_ = hits_end ? std::max(h_, h * fac) : h * fac;
        return;
      }
      ++rejected_;
      last_rejected = true;
      h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }

  // Must be called while y_ holds the old state and y1_ the new one.
  void build_dense_coefficients(double h) {
    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
    for (auto& r : r_) r.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const cplx ydiff = y1_[i] - y_[i];
      const cplx bspl = h * k_[0][i] - ydiff;
      r_[0][i] = y_[i];
      r_[1][i] = ydiff;
      r_[2][i] = bspl;
      r_[3][i] = ydiff - h * k_[6][i] - bspl;
      r_[4][i] = h * (d1 * k_[0][i] + d3 * k_[2][i] + d4 * k_[3][i] + d5 * k_[4][i] + d6 * k_[5][i] +
                      d7 * k_[6][i]);
    }
  }

  void interpolate(double t_old, double t) {
    const double theta = (t - t_old) / last_h_;
    const double theta1 = 1.0 - theta;
    for (std::size_t i = 0; i < n_; ++i) {
      tmp_[i] = r_[0][i] +
                theta * (r_[1][i] + theta1 * (r_[2][i] + theta * (r_[3][i] + theta1 * r_[4][i])));
    }
  }

  Rhs f_;
  std::size_t n_;
  IntegratorOptions opt_;
  std::vector<double> atol_;
  std::vector<cplx> y_, y1_, tmp_;
  std::vector<cplx> k_[7];
  std::vector<cplx> r_[5];
  double t_ = 0.0;
  double h_ = 0.0;
  double last_h_ = 0.0;
  bool started_ = false;
  std::size_t accepted_ = 0, rejected_ = 0, evaluations_ = 0;
};

}  // namespace superrad
