#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace superrad {

using cplx = std::complex<double>;

/// Square complex matrix in compressed sparse row form.
///
/// Column indices are 32 bit; dimensions above 2^32 - 1 are rejected at
/// construction. Products y = A x parallelise over rows.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t dim, std::vector<std::uint64_t> row_ptr, std::vector<std::uint32_t> cols,
               std::vector<cplx> vals);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return vals_.size(); }

  std::span<const std::uint64_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> cols() const { return cols_; }
  std::span<const cplx> values() const { return vals_; }

  /// y = A x
  void apply(std::span<const cplx> x, std::span<cplx> y) const;
  /// y = A^T x (plain transpose, no conjugation)
  void apply_transpose(std::span<const cplx> x, std::span<cplx> y) const;

  /// Entry (r, c), zero when not stored.
  cplx coeff(std::size_t r, std::size_t c) const;
  double max_abs() const;
  std::size_t memory_bytes() const;

  /// Sub-matrix on the sorted index set `keep` (rows and columns).
  SparseMatrix restricted(std::span<const std::uint32_t> keep) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::uint64_t> row_ptr_{0};
  std::vector<std::uint32_t> cols_;
  std::vector<cplx> vals_;
};

/// Indices reachable from the nonzero entries of x under repeated
/// application of A (sorted). Entries outside this set stay exactly zero
/// along exp(A t) x.
std::vector<std::uint32_t> reachable_support(const SparseMatrix& a, std::span<const cplx> x);

}  // namespace superrad
