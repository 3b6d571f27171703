#pragma once

// Action of collective and single-atom transition operators on the
// representative operator [n] of an occupation class.
//
// [n] stands for any product operator |alpha><beta| whose atoms fill the
// (ket, bra) boxes according to n. All rules follow from tracking which
// atoms an operator can act on:
//
//   sigma_ab [n]                  = sum_k n_bk [n_bk - 1, n_ak + 1]
//   [n] sigma_ab                  = sum_k n_ka [n_ka - 1, n_kb + 1]
//   sum_j sigma^j_ab [n] sigma^j_cd = n_bc [n_bc - 1, n_ad + 1]
//
// Products of collective operators are obtained by composing these maps,
// so no multi-index formula is written out by hand.

#include <complex>
#include <vector>

#include "superrad/symindex.hpp"

namespace superrad {

using cplx = std::complex<double>;

struct FormalTerm {
  Occupation n;
  cplx coef;
};

using FormalSum = std::vector<FormalTerm>;

namespace algebra {

/// out += factor * sigma_ab [in]
inline void left(int a, int b, const FormalTerm& in, cplx factor, FormalSum& out) {
  const int s = in.n.levels();
  for (int k = 0; k < s; ++k) {
    const int count = in.n(b, k);
    if (count == 0) continue;
    FormalTerm t{in.n, in.coef * factor * static_cast<double>(count)};
    --t.n(b, k);
    ++t.n(a, k);
    out.push_back(t);
  }
}

/// out += factor * [in] sigma_ab
inline void right(int a, int b, const FormalTerm& in, cplx factor, FormalSum& out) {
  const int s = in.n.levels();
  for (int k = 0; k < s; ++k) {
    const int count = in.n(k, a);
    if (count == 0) continue;
    FormalTerm t{in.n, in.coef * factor * static_cast<double>(count)};
    --t.n(k, a);
    ++t.n(k, b);
    out.push_back(t);
  }
}

/// out += factor * sum_j sigma^j_ab [in] sigma^j_cd
inline void sandwich(int a, int b, int c, int d, const FormalTerm& in, cplx factor, FormalSum& out) {
  const int count = in.n(b, c);
  if (count == 0) return;
  FormalTerm t{in.n, in.coef * factor * static_cast<double>(count)};
  --t.n(b, c);
  ++t.n(a, d);
  out.push_back(t);
}

inline void left(int a, int b, const FormalSum& in, cplx factor, FormalSum& out) {
  for (const auto& t : in) left(a, b, t, factor, out);
}

inline void right(int a, int b, const FormalSum& in, cplx factor, FormalSum& out) {
  for (const auto& t : in) right(a, b, t, factor, out);
}

/// out += factor * sigma_ab sigma_cd [in]
inline void left_pair(int a, int b, int c, int d, const FormalTerm& in, cplx factor, FormalSum& out,
                      FormalSum& scratch) {
  scratch.clear();
  left(c, d, in, 1.0, scratch);
  left(a, b, scratch, factor, out);
}

/// out += factor * [in] sigma_ab sigma_cd
inline void right_pair(int a, int b, int c, int d, const FormalTerm& in, cplx factor, FormalSum& out,
                       FormalSum& scratch) {
  scratch.clear();
  right(a, b, in, 1.0, scratch);
  right(c, d, scratch, factor, out);
}

/// out += factor * sigma_ab [in] sigma_cd (collective on both sides)
inline void both(int a, int b, int c, int d, const FormalTerm& in, cplx factor, FormalSum& out,
                 FormalSum& scratch) {
  scratch.clear();
  right(c, d, in, 1.0, scratch);
  left(a, b, scratch, factor, out);
}

}  // namespace algebra
}  // namespace superrad
