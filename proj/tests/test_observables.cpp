#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "superrad/error.hpp"
#include "superrad/initial.hpp"
#include "superrad/observables.hpp"
#include "superrad/oracle.hpp"

using namespace superrad;

namespace {

CollectiveRates unit_decay() {
  CollectiveRates r;
  r.Gamma = Eigen::MatrixXd::Zero(2, 2);
  r.Omega = Eigen::MatrixXd::Zero(2, 2);
  r.Gamma(1, 0) = 1.0;
  return r;
}

Eigen::MatrixXcd random_rho1(int s, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd a(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) a(i, j) = cplx(n(rng), n(rng));
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("fully excited readouts") {
  const int N = 10;
  const auto x = initial_state(InitialStateSpec::bloch(std::numbers::pi), N, 2);
  const auto rec = observe(x, unit_decay());
  CHECK(rec.P[1] == doctest::Approx(10.0));
  CHECK(rec.P[0] == doctest::Approx(0.0));
  CHECK(rec.I_tot == doctest::Approx(10.0));
  CHECK(rec.I_ind == doctest::Approx(10.0));
  CHECK(std::abs(rec.I_col) < 1e-12);
  const auto& dj = *rec.dJ;
  CHECK(dj[0] == doctest::Approx(std::sqrt(N / 4.0)));
  CHECK(dj[1] == doctest::Approx(std::sqrt(N / 4.0)));
  CHECK(dj[2] == doctest::Approx(0.0));
  CHECK((*rec.J)[2] == doctest::Approx(5.0));
}

TEST_CASE("equatorial state has maximal collective intensity") {
  const int N = 10;
  const auto x = initial_state(InitialStateSpec::bloch(std::numbers::pi / 2), N, 2);
  const auto in = intensity(x, unit_decay());
  CHECK(in.total == doctest::Approx(N * (N + 1) / 4.0));
  CHECK(in.collective == doctest::Approx(N * (N - 1) / 4.0));
  const auto j = angular_momentum(x);
  CHECK(j[0] == doctest::Approx(5.0));
  CHECK(std::abs(j[1]) < 1e-12);
}

TEST_CASE("Heisenberg uncertainty relations") {
  std::mt19937 rng(2);
  for (int k = 0; k < 20; ++k) {
    const auto x = product_state(random_rho1(2, rng), std::make_shared<const Basis>(7, 2));
    const auto j = angular_momentum(x);
    const auto d = angular_uncertainty(x);
    CHECK(d[0] * d[1] >= 0.5 * std::abs(j[2]) - 1e-10);
    CHECK(d[1] * d[2] >= 0.5 * std::abs(j[0]) - 1e-10);
    CHECK(d[2] * d[0] >= 0.5 * std::abs(j[1]) - 1e-10);
  }
}

TEST_CASE("products of collective operators agree with the full space") {
  std::mt19937 rng(4);
  const std::vector<OperatorProduct> products = {
      {}, {{1, 1}}, {{1, 0}}, {{0, 1}}, {{1, 0}, {0, 1}}, {{0, 1}, {1, 0}}, {{1, 0}, {1, 0}}, {{1, 1}, {0, 0}},
      {{1, 0}, {0, 1}, {1, 1}}};
  for (auto [N, s] : std::vector<std::pair<int, int>>{{1, 2}, {3, 2}, {4, 2}, {2, 3}, {3, 3}}) {
    const auto rho1 = random_rho1(s, rng);
    const auto basis = std::make_shared<const Basis>(N, s);
    const auto x = product_state(rho1, basis);
    const auto full = oracle::product_density(rho1, N);
    for (const auto& ops : products) {
      const cplx ref = oracle::full_expectation(full, ops);
      CHECK(std::abs(expectation(x, ops) - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
      cplx w = 0.0;
      for (const auto& [i, c] : readout_functional(*basis, ops)) w += c * x[i];
      CHECK(std::abs(w - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
    }
    if (s == 3) {
      const OperatorProduct op{{2, 1}, {1, 0}};
      CHECK(std::abs(expectation(x, op) - oracle::full_expectation(full, op)) < 1e-12);
    }
  }
}

TEST_CASE("angular momentum squares from the full space") {
  std::mt19937 rng(6);
  const int N = 4;
  const auto rho1 = random_rho1(2, rng);
  const auto x = product_state(rho1, std::make_shared<const Basis>(N, 2));
  const auto full = oracle::product_density(rho1, N);
  const cplx i{0.0, 1.0};
  const auto jp = oracle::collective_operator(N, 2, 1, 0);
  const auto jm = oracle::collective_operator(N, 2, 0, 1);
  const Eigen::MatrixXcd jx = (Eigen::MatrixXcd(jp) + Eigen::MatrixXcd(jm)) / 2.0;
  const Eigen::MatrixXcd jy = -i * (Eigen::MatrixXcd(jp) - Eigen::MatrixXcd(jm)) / 2.0;
  const auto sq = angular_momentum_squares(x);
  CHECK(sq[0] == doctest::Approx((full.rho * jx * jx).trace().real()).epsilon(1e-12));
  CHECK(sq[1] == doctest::Approx((full.rho * jy * jy).trace().real()).epsilon(1e-12));
}

TEST_CASE("hermitian defect and trace for random product states") {
  std::mt19937 rng(7);
  const auto x = product_state(random_rho1(3, rng), std::make_shared<const Basis>(5, 3));
  CHECK(hermitian_defect(x) < 1e-14);
  CHECK(trace(x) == doctest::Approx(1.0));
  double sum = 0.0;
  for (int l = 0; l < 3; ++l) sum += population(x, l);
  CHECK(sum == doctest::Approx(5.0));
}

TEST_CASE("angular momentum needs two levels") {
  const auto x = initial_state(InitialStateSpec::pure_level(3, 2), 2, 3);
  CHECK_THROWS_AS(angular_momentum(x), UnsupportedError);
  CHECK_THROWS_AS(population(x, 3), ValidationError);
}

TEST_CASE("large atom numbers keep the weights finite") {
  const int N = 400;
  const auto x = initial_state(InitialStateSpec::bloch(std::numbers::pi / 2), N, 2);
  CHECK(trace(x) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(population(x, 1) == doctest::Approx(200.0).epsilon(1e-10));
}

TEST_CASE("pulse metrics of a symmetric pulse") {
  std::vector<double> t, y;
  for (int k = 0; k <= 400; ++k) {
    t.push_back(k * 0.01);
    const double u = (t.back() - 2.003) / 0.3;
    y.push_back(5.0 / std::pow(std::cosh(u), 2));
  }
  const auto m = pulse_metrics(t, y);
  CHECK(m.is_pulse);
  CHECK(m.width_resolved);
  CHECK(m.t0 == doctest::Approx(2.003).epsilon(1e-4));
  CHECK(m.I_max == doctest::Approx(5.0).epsilon(1e-3));
  CHECK(m.tau == doctest::Approx(2.0 * 0.3 * std::acosh(std::sqrt(2.0))).epsilon(1e-3));
}

TEST_CASE("pulse metrics of a monotone decay") {
  std::vector<double> t, y;
  for (int k = 0; k <= 500; ++k) {
    t.push_back(k * 0.01);
    y.push_back(3.0 * std::exp(-t.back()));
  }
  const auto m = pulse_metrics(t, y);
  CHECK_FALSE(m.is_pulse);
  CHECK(m.I_max == doctest::Approx(3.0));
  CHECK(m.t0 == 0.0);
  CHECK(m.tau == doctest::Approx(std::log(2.0)).epsilon(1e-3));
}

TEST_CASE("pulse cut by the window edge") {
  std::vector<double> t, y;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(k * 0.01);
    y.push_back(std::exp(-std::pow(t.back() - 0.95, 2) / 0.01));
  }
  const auto m = pulse_metrics(t, y);
  CHECK(m.is_pulse);
  CHECK_FALSE(m.width_resolved);
}
