#include "superrad/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "superrad/error.hpp"
#include "superrad/integrator.hpp"

namespace superrad::oracle {

namespace {

std::vector<int> digits(std::size_t index, int atoms, int levels) {
  std::vector<int> d(atoms);
  for (int j = 0; j < atoms; ++j) {
    d[j] = static_cast<int>(index % levels);
    index /= levels;
  }
  return d;
}

std::size_t index_of_digits(const std::vector<int>& d, int levels) {
  std::size_t idx = 0;
  for (int j = static_cast<int>(d.size()) - 1; j >= 0; --j) idx = idx * levels + d[j];
  return idx;
}

// All product states as digit vectors, index order.
std::vector<std::vector<int>> all_digits(int atoms, int levels) {
  const std::size_t dim = full_dimension(atoms, levels);
  std::vector<std::vector<int>> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = digits(i, atoms, levels);
  return out;
}

Occupation class_of(const std::vector<int>& alpha, const std::vector<int>& beta, int levels) {
  Occupation n(levels);
  for (std::size_t j = 0; j < alpha.size(); ++j) ++n(alpha[j], beta[j]);
  return n;
}

// Lexicographically smallest (alpha, beta) in the class of n.
std::pair<std::size_t, std::size_t> representative(const Occupation& n) {
  const int s = n.levels();
  std::vector<int> alpha, beta;
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < s; ++b)
      for (int k = 0; k < n(a, b); ++k) {
        alpha.push_back(a);
        beta.push_back(b);
      }
  return {index_of_digits(alpha, s), index_of_digits(beta, s)};
}

Eigen::Map<const Eigen::MatrixXcd> as_matrix(std::span<const cplx> v, std::size_t d) {
  return {v.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)};
}

Eigen::Map<Eigen::MatrixXcd> as_matrix(std::span<cplx> v, std::size_t d) {
  return {v.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)};
}

IntegratorOptions options(const SolverConfig& cfg) {
  IntegratorOptions o;
  o.rel_tol = cfg.rel_tol;
  o.abs_tol = cfg.abs_tol;
  o.max_step = cfg.max_step;
  o.max_steps = cfg.max_steps;
  return o;
}

std::vector<Eigen::MatrixXcd> evolve_matrix(const FullLindblad& lind, const Eigen::MatrixXcd& m0,
                                            std::span<const double> grid, const SolverConfig& cfg) {
  const std::size_t d = lind.dim();
  Eigen::MatrixXcd tmp(d, d);
  Dopri5 integ(
      [&](double t, std::span<const cplx> y, std::span<cplx> dy) {
        lind.apply(t, as_matrix(y, d), tmp);
        as_matrix(dy, d) = tmp;
      },
      d * d, options(cfg));
  integ.reset(grid.front(), std::span<const cplx>(m0.data(), d * d));
  std::vector<Eigen::MatrixXcd> out;
  integ.integrate_grid(grid, [&](std::size_t, double, std::span<const cplx> y) { out.emplace_back(as_matrix(y, d)); });
  return out;
}

}  // namespace

std::size_t full_dimension(int atoms, int levels) {
  if (atoms < 1 || levels < 2) throw ValidationError("oracle needs N >= 1 and s >= 2");
  std::size_t d = 1;
  for (int j = 0; j < atoms; ++j) {
    d *= static_cast<std::size_t>(levels);
    if (d > kMaxFullDimension) {
      throw CapacityError("full Hilbert space s^N exceeds the oracle cap of " + std::to_string(kMaxFullDimension));
    }
  }
  return d;
}

SparseOp single_operator(int atoms, int levels, int j, int a, int b) {
  const std::size_t dim = full_dimension(atoms, levels);
  if (j < 0 || j >= atoms || a < 0 || a >= levels || b < 0 || b >= levels) {
    throw ValidationError("single_operator index out of range");
  }
  std::vector<Eigen::Triplet<cplx>> t;
  std::size_t stride = 1;
  for (int k = 0; k < j; ++k) stride *= levels;
  for (std::size_t i = 0; i < dim; ++i) {
    const int dj = static_cast<int>((i / stride) % levels);
    if (dj != b) continue;
    const std::size_t target = i + (static_cast<std::ptrdiff_t>(a) - b) * static_cast<std::ptrdiff_t>(stride);
    t.emplace_back(static_cast<int>(target), static_cast<int>(i), 1.0);
  }
  SparseOp op(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  op.setFromTriplets(t.begin(), t.end());
  return op;
}

SparseOp collective_operator(int atoms, int levels, int a, int b) {
  SparseOp s = single_operator(atoms, levels, 0, a, b);
  for (int j = 1; j < atoms; ++j) s += single_operator(atoms, levels, j, a, b);
  return s;
}

FullDensityMatrix product_density(const Eigen::MatrixXcd& rho1, int atoms) {
  return product_density(std::vector<Eigen::MatrixXcd>(atoms, rho1));
}

FullDensityMatrix product_density(const std::vector<Eigen::MatrixXcd>& per_atom) {
  if (per_atom.empty()) throw ValidationError("product_density needs at least one atom");
  const int s = static_cast<int>(per_atom[0].rows());
  const int atoms = static_cast<int>(per_atom.size());
  const std::size_t dim = full_dimension(atoms, s);
  FullDensityMatrix out{atoms, s, Eigen::MatrixXcd(dim, dim)};
  const auto dig = all_digits(atoms, s);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      cplx v = 1.0;
      for (int j = 0; j < atoms; ++j) v *= per_atom[j](dig[r][j], dig[c][j]);
      out.rho(r, c) = v;
    }
  }
  return out;
}

FullLindblad::FullLindblad(const SystemParams& p, const CollectiveRates& r, TermSet terms)
    : atoms_(p.atoms), levels_(p.levels), dim_(full_dimension(p.atoms, p.levels)) {
  p.validate();
  const int s = levels_;
  const auto n = static_cast<Eigen::Index>(dim_);
  h_static_ = SparseOp(n, n);
  h_raise_ = SparseOp(n, n);
  h_lower_ = SparseOp(n, n);
  std::vector<std::vector<SparseOp>> S(s, std::vector<SparseOp>(s));
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < s; ++b) S[a][b] = collective_operator(atoms_, s, a, b);

  if (terms.atomic)
    for (int l = 0; l < s; ++l) h_static_ += p.frame_frequency(l) * S[l][l];

  if (terms.drive && p.has_drive()) {
    for (int l = 0; l < s; ++l) {
      for (int lp = 0; lp < l; ++lp) {
        const cplx v = p.drive(l, lp);
        if (v == cplx{0.0, 0.0}) continue;
        h_raise_ += v * S[l][lp];
        h_lower_ += std::conj(v) * S[lp][l];
      }
    }
    if (p.frame == Frame::Lab && p.omega_d != 0.0) {
      time_dependent_ = true;
      omega_d_ = p.omega_d;
    } else {
      h_static_ += h_raise_ + h_lower_;
    }
  }

  if (terms.lamb_shift)
    for (int l = 0; l < s; ++l)
      for (int lp = 0; lp < l; ++lp)
        if (r.Omega(l, lp) != 0.0) h_static_ += r.Omega(l, lp) * SparseOp(S[l][lp] * S[lp][l]);

  auto add_jump = [&](SparseOp op, double rate) {
    SparseOp dag = op.adjoint();
    SparseOp dd = dag * op;
    jumps_.push_back({std::move(op), std::move(dd), rate});
  };
  if (terms.individual_dissipation) {
    for (int l = 0; l < s; ++l)
      for (int lp = 0; lp < s; ++lp)
        if (l != lp && p.gamma(l, lp) != 0.0)
          for (int j = 0; j < atoms_; ++j) add_jump(single_operator(atoms_, s, j, lp, l), p.gamma(l, lp));
  }
  if (terms.dephasing) {
    for (int l = 0; l < s; ++l)
      for (int lp = 0; lp < l; ++lp)
        if (p.xi(l, lp) != 0.0)
          for (int j = 0; j < atoms_; ++j) {
            SparseOp o = single_operator(atoms_, s, j, l, l) - single_operator(atoms_, s, j, lp, lp);
            add_jump(std::move(o), p.xi(l, lp));
          }
  }
  if (terms.collective_decay) {
    for (int l = 0; l < s; ++l)
      for (int lp = 0; lp < l; ++lp)
        if (r.Gamma(l, lp) != 0.0) add_jump(S[lp][l], r.Gamma(l, lp));
  }
}

void FullLindblad::apply(double t, const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
  const cplx i{0.0, 1.0};
  Eigen::MatrixXcd hr = h_static_ * rho;
  Eigen::MatrixXcd rh = rho * h_static_;
  if (time_dependent_) {
    const cplx f = std::polar(1.0, -omega_d_ * t);
    hr += f * (h_raise_ * rho) + std::conj(f) * (h_lower_ * rho);
    rh += f * (rho * h_raise_) + std::conj(f) * (rho * h_lower_);
  }
  out = -i * (hr - rh);
  for (const auto& jmp : jumps_) {
    Eigen::MatrixXcd orho = jmp.op * rho;
    out += jmp.rate * (orho * SparseOp(jmp.op.adjoint()));
    out -= 0.5 * jmp.rate * (jmp.op_dag_op * rho + rho * jmp.op_dag_op);
  }
}

std::vector<FullDensityMatrix> full_evolve(const FullDensityMatrix& rho0, const SystemParams& p,
                                           const CollectiveRates& r, std::span<const double> grid,
                                           const SolverConfig& cfg, TermSet terms) {
  if (grid.empty()) throw ValidationError("time grid is empty");
  FullLindblad lind(p, r, terms);
  if (static_cast<std::size_t>(rho0.rho.rows()) != lind.dim()) throw ValidationError("rho0 has wrong dimension");
  std::vector<FullDensityMatrix> out;
  for (auto& m : evolve_matrix(lind, rho0.rho, grid, cfg)) out.push_back({p.atoms, p.levels, std::move(m)});
  return out;
}

CollectiveState project_collective(const FullDensityMatrix& rho, std::shared_ptr<const Basis> basis, double tol) {
  if (basis->atoms() != rho.atoms || basis->levels() != rho.levels) {
    throw ValidationError("basis does not match the density matrix");
  }
  const int s = rho.levels;
  const std::size_t dim = full_dimension(rho.atoms, s);
  CollectiveState x{basis, std::vector<cplx>(basis->size())};
  Occupation n = basis->first();
  for (std::size_t i = 0; i < basis->size(); ++i) {
    const auto [a, b] = representative(n);
    x.values[i] = rho.rho(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
    basis->next(n);
  }
  const auto dig = all_digits(rho.atoms, s);
  double worst = 0.0;
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = 0; b < dim; ++b) {
      const auto k = basis->rank(class_of(dig[a], dig[b], s));
      worst = std::max(worst, std::abs(rho.rho(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) -
                                       x.values[k]));
    }
  }
  if (worst > tol) {
    throw SymmetryViolationError("density matrix is not permutation symmetric (deviation " + std::to_string(worst) +
                                 ")");
  }
  return x;
}

Eigen::MatrixXcd basis_operator(const Basis& basis, BasisIndex m) {
  const int s = basis.levels();
  const std::size_t dim = full_dimension(basis.atoms(), s);
  const auto dig = all_digits(basis.atoms(), s);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b)
      if (basis.rank(class_of(dig[a], dig[b], s)) == m) out(b, a) = 1.0;
  return out;
}

Eigen::MatrixXcd reference_generator(std::shared_ptr<const Basis> basis, const SystemParams& p,
                                     const CollectiveRates& r, TermSet terms) {
  FullLindblad lind(p, r, terms);
  if (lind.time_dependent()) throw FrameError("reference generator needs a time-independent Lindbladian");
  const std::size_t dim = basis->size();
  Eigen::MatrixXcd gen(dim, dim);
  Eigen::MatrixXcd out;
  for (std::size_t m = 0; m < dim; ++m) {
    lind.apply(0.0, basis_operator(*basis, m), out);
    const auto col = project_collective({p.atoms, p.levels, out}, basis, 1e-9);
    for (std::size_t k = 0; k < dim; ++k) gen(k, m) = col.values[k];
  }
  return gen;
}

cplx full_expectation(const FullDensityMatrix& rho, const OperatorProduct& ops) {
  const auto dim = static_cast<Eigen::Index>(rho.rho.rows());
  SparseOp m(dim, dim);
  m.setIdentity();
  for (const auto& [a, b] : ops) m = m * collective_operator(rho.atoms, rho.levels, a, b);
  Eigen::MatrixXcd prod = rho.rho * m;
  return prod.trace();
}

std::vector<cplx> full_two_time(const FullDensityMatrix& std_rho, const SystemParams& p, const CollectiveRates& r,
                                int l, int lp, std::span<const double> tau_grid, const SolverConfig& cfg,
                                TermSet terms) {
  if (tau_grid.empty()) throw ValidationError("tau grid is empty");
  FullLindblad lind(p, r, terms);
  const SparseOp down = collective_operator(p.atoms, p.levels, lp, l);
  const SparseOp up = collective_operator(p.atoms, p.levels, l, lp);
  const Eigen::MatrixXcd seed = down * std_rho.rho;
  std::vector<cplx> g;
  for (const auto& m : evolve_matrix(lind, seed, tau_grid, cfg)) g.push_back((up * m).trace());
  return g;
}

FullDensityMatrix full_steady_state(const SystemParams& p, const CollectiveRates& r, TermSet terms) {
  FullLindblad lind(p, r, terms);
  if (lind.time_dependent()) throw FrameError("steady state needs a time-independent Lindbladian");
  const std::size_t d = lind.dim();
  if (d > 64) throw CapacityError("dense steady-state solve limited to s^N <= 64");
  const std::size_t d2 = d * d;
  Eigen::MatrixXcd sup(d2, d2);
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(d, d), out;
  for (std::size_t c = 0; c < d2; ++c) {
    e.setZero();
    e(static_cast<Eigen::Index>(c % d), static_cast<Eigen::Index>(c / d)) = 1.0;
    lind.apply(0.0, e, out);
    sup.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXcd>(out.data(), static_cast<Eigen::Index>(d2));
  }
  // replace the first row by the trace condition
  sup.row(0).setZero();
  for (std::size_t k = 0; k < d; ++k) sup(0, static_cast<Eigen::Index>(k * d + k)) = 1.0;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d2));
  rhs(0) = 1.0;
  Eigen::VectorXcd sol = sup.fullPivLu().solve(rhs);
  FullDensityMatrix rho{p.atoms, p.levels, Eigen::Map<Eigen::MatrixXcd>(sol.data(), static_cast<Eigen::Index>(d),
                                                                        static_cast<Eigen::Index>(d))};
  return rho;
}

}  // namespace superrad::oracle
