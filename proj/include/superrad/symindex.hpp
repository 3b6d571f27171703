#pragma once

// Collective basis of occupation matrices: enumeration, ranking,
// unranking and multinomial multiplicities.
//
// An occupation matrix n = {n_ll'} counts, for a product operator
// |alpha><beta|, how many atoms sit in ket level l and bra level l'.
// Entries are non-negative and add up to the atom count N.
//
// Canonical order: lexicographic (ascending) over the row-major flattening
// (n_00, n_01, ..., n_{s-1,s-1}). The first element therefore has
// n_{s-1,s-1} = N (all atoms in the top level on both sides) and the last
// element has n_00 = N.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace superrad {

inline constexpr int kMaxLevels = 6;
inline constexpr int kMaxBoxes = kMaxLevels * kMaxLevels;

using BasisIndex = std::size_t;

class Occupation {
 public:
  Occupation() = default;
  explicit Occupation(int levels);
  /// Row-major entries; size must be levels * levels.
  Occupation(int levels, std::span<const int> entries);

  int levels() const { return levels_; }
  int boxes() const { return levels_ * levels_; }

  int operator()(int l, int lp) const { return n_[l * levels_ + lp]; }
  int& operator()(int l, int lp) { return n_[l * levels_ + lp]; }

  int flat(int box) const { return n_[box]; }
  int& flat(int box) { return n_[box]; }
  std::span<const int> entries() const { return {n_.data(), static_cast<std::size_t>(boxes())}; }

  int total() const;
  bool is_diagonal() const;
  Occupation transposed() const;

  std::string to_string() const;

  friend bool operator==(const Occupation& a, const Occupation& b);

 private:
  int levels_ = 0;
  std::array<int, kMaxBoxes> n_{};
};

/// Number of ways to put N atoms into s^2 boxes, C(N + s^2 - 1, s^2 - 1).
/// Throws CapacityError when the value exceeds the addressable element count.
std::size_t dimension(int atoms, int levels);

/// Exact dimension without the addressability limit.
boost::multiprecision::cpp_int dimension_exact(int atoms, int levels);

/// Multinomial coefficient N! / prod n_ll'!.
///
/// The logarithm is always available. The exact integer is kept for
/// N <= kExactMultiplicityLimit; beyond that only the log form is stored.
struct Multiplicity {
  static constexpr int kExactMultiplicityLimit = 170;

  double log_value = 0.0;
  std::optional<boost::multiprecision::cpp_int> exact;

  /// Floating value; +inf when it does not fit a double.
  double value() const;
};

class Basis {
 public:
  Basis(int atoms, int levels);

  int atoms() const { return atoms_; }
  int levels() const { return levels_; }
  std::size_t size() const { return dim_; }

  /// Throws ValidationError for malformed matrices.
  BasisIndex index_of(const Occupation& n) const;
  /// Unchecked ranking for matrices already known to be valid.
  BasisIndex rank(const Occupation& n) const;
  Occupation occupations_of(BasisIndex i) const;

  Occupation first() const;
  /// Advances to the lexicographic successor; false when n was the last.
  bool next(Occupation& n) const;

  /// Materialises the whole basis. Throws CapacityError when the result
  /// would exceed memory_budget bytes.
  std::vector<Occupation> enumerate(std::size_t memory_budget = std::size_t{2} << 30) const;

  /// Indices of matrices with every off-diagonal entry zero, ascending.
  const std::vector<BasisIndex>& diagonal_subbasis() const { return diagonal_; }
  /// log multiplicity of each diagonal_subbasis() element, same order.
  const std::vector<double>& diagonal_log_multiplicity() const { return diagonal_log_mult_; }
  /// Multiplicity of each diagonal_subbasis() element as a correctly rounded
  /// double (+inf when it does not fit).
  const std::vector<double>& diagonal_multiplicity() const { return diagonal_mult_; }

  Multiplicity multiplicity(const Occupation& n) const;
  double log_multiplicity(const Occupation& n) const;

  void validate(const Occupation& n) const;

 private:
  // Number of compositions of m into `parts` non-negative parts.
  std::uint64_t compositions(int parts, int m) const {
    return parts == 0 ? (m == 0 ? 1 : 0) : table_[static_cast<std::size_t>(parts - 1) * (atoms_ + 1) + m];
  }

  int atoms_;
  int levels_;
  int boxes_;
  std::size_t dim_;
  std::vector<std::uint64_t> table_;
  std::vector<double> log_factorial_;
  std::vector<BasisIndex> diagonal_;
  std::vector<double> diagonal_log_mult_;
  std::vector<double> diagonal_mult_;
};

/// Convenience wrappers mirroring the free-function interface.
std::vector<Occupation> enumerate_basis(int atoms, int levels);
std::vector<BasisIndex> diagonal_subbasis(int atoms, int levels);
Multiplicity multiplicity(const Occupation& n);

}  // namespace superrad
