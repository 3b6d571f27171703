#pragma once

// Sparse generator L of the collective equation of motion d<n>/dt = L <n>.
//
// Row n of L is obtained by expanding the adjoint Lindblad action on the
// class representative [n] (see algebra.hpp) and ranking every resulting
// occupation class. Six contributions can be switched independently:
//
//   atomic                  i [H_a, .]
//   drive                   i [H_d, .]
//   lamb_shift              i [H_s, .],  H_s = sum Omega sigma_ll' sigma_l'l
//   individual_dissipation  per-atom decay and incoherent pump
//   dephasing               per-atom sigma_ll - sigma_l'l' dephasing
//   collective_decay        collective Lindblad term with sigma_l'l

#include <iosfwd>
#include <memory>

#include "superrad/model.hpp"
#include "superrad/sparse.hpp"
#include "superrad/symindex.hpp"

namespace superrad {

struct TermSet {
  bool atomic = true;
  bool drive = true;
  bool lamb_shift = true;
  bool individual_dissipation = true;
  bool dephasing = true;
  bool collective_decay = true;

  static TermSet all() { return {}; }
  static TermSet none() { return {false, false, false, false, false, false}; }
};

class Generator {
 public:
  Generator(std::shared_ptr<const Basis> basis, SparseMatrix matrix, Frame frame)
      : basis_(std::move(basis)), matrix_(std::move(matrix)), frame_(frame) {}

  const Basis& basis() const { return *basis_; }
  const std::shared_ptr<const Basis>& basis_ptr() const { return basis_; }
  const SparseMatrix& matrix() const { return matrix_; }
  Frame frame() const { return frame_; }

  std::size_t dim() const { return matrix_.dim(); }
  std::size_t nnz() const { return matrix_.nnz(); }
  cplx coeff(BasisIndex row, BasisIndex col) const { return matrix_.coeff(row, col); }

  void apply(std::span<const cplx> x, std::span<cplx> y) const { matrix_.apply(x, y); }

 private:
  std::shared_ptr<const Basis> basis_;
  SparseMatrix matrix_;
  Frame frame_;
};

/// Throws FrameError for a lab-frame drive (use build_lab_frame_generator)
/// and for rotating-frame drives on pairs whose rungs differ by anything
/// other than one.
Generator build_generator(std::shared_ptr<const Basis> basis, const SystemParams& p, const CollectiveRates& r,
                          TermSet terms = TermSet::all());
Generator build_generator(const SystemParams& p, const CollectiveRates& r, TermSet terms = TermSet::all());

Generator contribution_atomic(std::shared_ptr<const Basis> basis, const SystemParams& p);
Generator contribution_drive(std::shared_ptr<const Basis> basis, const SystemParams& p);
Generator contribution_lamb_shift(std::shared_ptr<const Basis> basis, const SystemParams& p,
                                  const CollectiveRates& r);
Generator contribution_individual_dissipation(std::shared_ptr<const Basis> basis, const SystemParams& p);
Generator contribution_dephasing(std::shared_ptr<const Basis> basis, const SystemParams& p);
Generator contribution_collective_decay(std::shared_ptr<const Basis> basis, const SystemParams& p,
                                        const CollectiveRates& r);

/// Lab-frame generator L(t) = L_static + f(t) L_raise + conj(f(t)) L_lower
/// with drive coefficient f(t) (exp(-i omega_d t) for a monochromatic drive).
/// L_raise carries the v0 sigma_ll' part of the drive, L_lower the
/// conj(v0) sigma_l'l part.
struct LabFrameGenerator {
  Generator static_part;
  Generator raise;
  Generator lower;
};
LabFrameGenerator build_lab_frame_generator(std::shared_ptr<const Basis> basis, const SystemParams& p,
                                            const CollectiveRates& r, TermSet terms = TermSet::all());

/// Coordinate dump, one "row col re im" line per stored entry.
void dump_coordinates(const Generator& g, std::ostream& os);

/// Trace functional weights: multiplicity for diagonal classes, 0 otherwise.
std::vector<double> trace_weights(const Basis& basis);

}  // namespace superrad
