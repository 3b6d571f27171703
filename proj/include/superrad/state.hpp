#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "superrad/symindex.hpp"

namespace superrad {

using cplx = std::complex<double>;

/// Values <n> over the canonical basis of (N, s).
struct CollectiveState {
  std::shared_ptr<const Basis> basis;
  std::vector<cplx> values;

  int atoms() const { return basis->atoms(); }
  int levels() const { return basis->levels(); }
  std::size_t size() const { return values.size(); }

  cplx operator[](BasisIndex i) const { return values[i]; }
  cplx& operator[](BasisIndex i) { return values[i]; }
  cplx at(const Occupation& n) const { return values[basis->index_of(n)]; }
};

}  // namespace superrad
