#pragma once

// Brute-force reference over the full s^N dimensional Hilbert space.
//
// Product state |alpha> = |l_0 l_1 ... l_{N-1}> has index sum_j l_j s^j.
// Density matrices are dense; collective operators are sparse.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "superrad/dynamics.hpp"
#include "superrad/generator.hpp"
#include "superrad/model.hpp"
#include "superrad/observables.hpp"
#include "superrad/state.hpp"

namespace superrad::oracle {

inline constexpr std::size_t kMaxFullDimension = 4096;

using SparseOp = Eigen::SparseMatrix<cplx>;

struct FullDensityMatrix {
  int atoms = 1;
  int levels = 2;
  Eigen::MatrixXcd rho;
};

/// s^N, throwing CapacityError above kMaxFullDimension.
std::size_t full_dimension(int atoms, int levels);

/// sigma^j_ab on atom j.
SparseOp single_operator(int atoms, int levels, int j, int a, int b);
/// S_ab = sum_j sigma^j_ab.
SparseOp collective_operator(int atoms, int levels, int a, int b);

/// rho1 tensor ... tensor rho1.
FullDensityMatrix product_density(const Eigen::MatrixXcd& rho1, int atoms);
/// Product density matrix with the given per-atom states (not symmetric in general).
FullDensityMatrix product_density(const std::vector<Eigen::MatrixXcd>& per_atom);

/// Lindblad right-hand side in the full space.
class FullLindblad {
 public:
  FullLindblad(const SystemParams& p, const CollectiveRates& r, TermSet terms = TermSet::all());

  int atoms() const { return atoms_; }
  int levels() const { return levels_; }
  std::size_t dim() const { return dim_; }
  bool time_dependent() const { return time_dependent_; }

  /// out = L(t) rho
  void apply(double t, const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const;

 private:
  struct Jump {
    SparseOp op;
    SparseOp op_dag_op;
    double rate;
  };
  int atoms_, levels_;
  std::size_t dim_;
  SparseOp h_static_;
  SparseOp h_raise_, h_lower_;
  double omega_d_ = 0.0;
  bool time_dependent_ = false;
  std::vector<Jump> jumps_;
};

std::vector<FullDensityMatrix> full_evolve(const FullDensityMatrix& rho0, const SystemParams& p,
                                           const CollectiveRates& r, std::span<const double> grid,
                                           const SolverConfig& cfg, TermSet terms = TermSet::all());

/// Representative projection with a full permutation-symmetry check.
/// Throws SymmetryViolationError when two members of a class differ by more
/// than tol.
CollectiveState project_collective(const FullDensityMatrix& rho, std::shared_ptr<const Basis> basis,
                                   double tol = 1e-10);

/// sum over class m of |beta><alpha|; its projection is the unit vector e_m.
Eigen::MatrixXcd basis_operator(const Basis& basis, BasisIndex m);

/// Dense generator obtained column by column from the full Lindbladian.
/// Rotating frame only.
Eigen::MatrixXcd reference_generator(std::shared_ptr<const Basis> basis, const SystemParams& p,
                                     const CollectiveRates& r, TermSet terms = TermSet::all());

/// tr{rho S_a1b1 S_a2b2 ...}
cplx full_expectation(const FullDensityMatrix& rho, const OperatorProduct& ops);

/// g(tau) = tr{S_ll' rho~(tau)} with rho~(0) = S_l'l rho_std.
std::vector<cplx> full_two_time(const FullDensityMatrix& std_rho, const SystemParams& p, const CollectiveRates& r,
                                int l, int lp, std::span<const double> tau_grid, const SolverConfig& cfg,
                                TermSet terms = TermSet::all());

/// Null vector of the full Lindbladian with unit trace (dense solve, s^N <= 64).
FullDensityMatrix full_steady_state(const SystemParams& p, const CollectiveRates& r, TermSet terms = TermSet::all());

}  // namespace superrad::oracle
