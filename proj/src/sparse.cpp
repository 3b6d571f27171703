#include "superrad/sparse.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "superrad/error.hpp"

namespace superrad {

SparseMatrix::SparseMatrix(std::size_t dim, std::vector<std::uint64_t> row_ptr, std::vector<std::uint32_t> cols,
                           std::vector<cplx> vals)
    : dim_(dim), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), vals_(std::move(vals)) {
  if (dim_ > std::numeric_limits<std::uint32_t>::max()) {
    throw CapacityError("sparse dimension " + std::to_string(dim_) + " exceeds 32-bit column indices");
  }
  if (row_ptr_.size() != dim_ + 1 || row_ptr_.back() != vals_.size() || cols_.size() != vals_.size()) {
    throw ConsistencyError("inconsistent CSR arrays");
  }
}

void SparseMatrix::apply(std::span<const cplx> x, std::span<cplx> y) const {
  const auto n = static_cast<std::int64_t>(dim_);
  const auto* rp = row_ptr_.data();
  const auto* ci = cols_.data();
  const auto* v = vals_.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < n; ++r) {
    cplx acc{0.0, 0.0};
    for (auto k = rp[r]; k < rp[r + 1]; ++k) acc += v[k] * x[ci[k]];
    y[r] = acc;
  }
}

void SparseMatrix::apply_transpose(std::span<const cplx> x, std::span<cplx> y) const {
  std::fill(y.begin(), y.end(), cplx{0.0, 0.0});
  for (std::size_t r = 0; r < dim_; ++r) {
    const cplx xr = x[r];
    if (xr == cplx{0.0, 0.0}) continue;
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y[cols_[k]] += vals_[k] * xr;
  }
}

cplx SparseMatrix::coeff(std::size_t r, std::size_t c) const {
  const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
  if (it == last || *it != c) return {0.0, 0.0};
  return vals_[static_cast<std::size_t>(it - cols_.begin())];
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& v : vals_) m = std::max(m, std::abs(v));
  return m;
}

std::size_t SparseMatrix::memory_bytes() const {
  return row_ptr_.capacity() * sizeof(std::uint64_t) + cols_.capacity() * sizeof(std::uint32_t) +
         vals_.capacity() * sizeof(cplx);
}

SparseMatrix SparseMatrix::restricted(std::span<const std::uint32_t> keep) const {
  constexpr auto kAbsent = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> position(dim_, kAbsent);
  for (std::size_t i = 0; i < keep.size(); ++i) position[keep[i]] = static_cast<std::uint32_t>(i);

  std::vector<std::uint64_t> rp;
  rp.reserve(keep.size() + 1);
  rp.push_back(0);
  std::vector<std::uint32_t> ci;
  std::vector<cplx> v;
  for (auto r : keep) {
    for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const auto p = position[cols_[k]];
      if (p == kAbsent) continue;
      ci.push_back(p);
      v.push_back(vals_[k]);
    }
    rp.push_back(v.size());
  }
  return SparseMatrix(keep.size(), std::move(rp), std::move(ci), std::move(v));
}

std::vector<std::uint32_t> reachable_support(const SparseMatrix& a, std::span<const cplx> x) {
  const std::size_t n = a.dim();
  // Column-wise adjacency: for source column c, the rows it feeds.
  std::vector<std::uint64_t> cp(n + 1, 0);
  const auto rp = a.row_ptr();
  const auto ci = a.cols();
  for (auto c : ci) ++cp[c + 1];
  for (std::size_t c = 0; c < n; ++c) cp[c + 1] += cp[c];
  std::vector<std::uint32_t> rows(ci.size());
  {
    std::vector<std::uint64_t> fill(cp.begin(), cp.end() - 1);
    for (std::size_t r = 0; r < n; ++r)
      for (auto k = rp[r]; k < rp[r + 1]; ++k) rows[fill[ci[k]]++] = static_cast<std::uint32_t>(r);
  }

  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> stack;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] != cplx{0.0, 0.0}) {
      seen[i] = 1;
      stack.push_back(static_cast<std::uint32_t>(i));
    }
  }
  while (!stack.empty()) {
    const auto c = stack.back();
    stack.pop_back();
    for (auto k = cp[c]; k < cp[c + 1]; ++k) {
      const auto r = rows[k];
      if (!seen[r]) {
        seen[r] = 1;
        stack.push_back(r);
      }
    }
  }
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (seen[i]) out.push_back(static_cast<std::uint32_t>(i));
  return out;
}

}  // namespace superrad
