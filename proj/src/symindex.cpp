#include "superrad/symindex.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>

#include "superrad/error.hpp"

namespace superrad {

namespace mp = boost::multiprecision;

Occupation::Occupation(int levels) : levels_(levels) {
  if (levels < 1 || levels > kMaxLevels) {
    throw ValidationError("level count " + std::to_string(levels) + " outside [1, " +
                          std::to_string(kMaxLevels) + "]");
  }
}

Occupation::Occupation(int levels, std::span<const int> entries) : Occupation(levels) {
  if (entries.size() != static_cast<std::size_t>(levels * levels)) {
    throw ValidationError("occupation matrix needs " + std::to_string(levels * levels) + " entries");
  }
  std::copy(entries.begin(), entries.end(), n_.begin());
}

int Occupation::total() const {
  int sum = 0;
  for (int b = 0; b < boxes(); ++b) sum += n_[b];
  return sum;
}

bool Occupation::is_diagonal() const {
  for (int l = 0; l < levels_; ++l)
    for (int lp = 0; lp < levels_; ++lp)
      if (l != lp && (*this)(l, lp) != 0) return false;
  return true;
}

Occupation Occupation::transposed() const {
  Occupation t(levels_);
  for (int l = 0; l < levels_; ++l)
    for (int lp = 0; lp < levels_; ++lp) t(l, lp) = (*this)(lp, l);
  return t;
}

std::string Occupation::to_string() const {
  std::ostringstream os;
  os << '[';
  for (int l = 0; l < levels_; ++l) {
    if (l) os << "; ";
    for (int lp = 0; lp < levels_; ++lp) {
      if (lp) os << ' ';
      os << (*this)(l, lp);
    }
  }
  os << ']';
  return os.str();
}

bool operator==(const Occupation& a, const Occupation& b) {
  if (a.levels_ != b.levels_) return false;
  return std::equal(a.n_.begin(), a.n_.begin() + a.boxes(), b.n_.begin());
}

namespace {

void check_sizes(int atoms, int levels) {
  if (atoms < 1) throw ValidationError("atom count must be >= 1, got " + std::to_string(atoms));
  if (levels < 2 || levels > kMaxLevels) {
    throw ValidationError("level count must be in [2, " + std::to_string(kMaxLevels) + "], got " +
                          std::to_string(levels));
  }
}

mp::cpp_int binomial_exact(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  mp::cpp_int r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

// Largest element count we are willing to index: a complex vector of this
// length must be addressable.
constexpr std::size_t kMaxElements =
    static_cast<std::size_t>(std::numeric_limits<std::ptrdiff_t>::max()) / sizeof(std::complex<double>);

}  // namespace

mp::cpp_int dimension_exact(int atoms, int levels) {
  check_sizes(atoms, levels);
  const int boxes = levels * levels;
  return binomial_exact(atoms + boxes - 1, boxes - 1);
}

std::size_t dimension(int atoms, int levels) {
  const mp::cpp_int d = dimension_exact(atoms, levels);
  if (d > kMaxElements) {
    throw CapacityError("basis size C(" + std::to_string(atoms + levels * levels - 1) + ", " +
                        std::to_string(levels * levels - 1) + ") = " + d.str() +
                        " exceeds addressable size");
  }
  return d.convert_to<std::size_t>();
}

double Multiplicity::value() const {
  if (exact) {
    // cpp_int -> double saturates to inf on overflow.
    return exact->convert_to<double>();
  }
  return log_value > 709.0 ? std::numeric_limits<double>::infinity() : std::exp(log_value);
}

Basis::Basis(int atoms, int levels)
    : atoms_(atoms), levels_(levels), boxes_(levels * levels), dim_(dimension(atoms, levels)) {
  const auto stride = static_cast<std::size_t>(atoms_ + 1);
  table_.assign(static_cast<std::size_t>(boxes_) * stride, 0);
  for (int m = 0; m <= atoms_; ++m) table_[m] = 1;
  for (int p = 2; p <= boxes_; ++p) {
    auto* row = &table_[static_cast<std::size_t>(p - 1) * stride];
    const auto* prev = &table_[static_cast<std::size_t>(p - 2) * stride];
    row[0] = 1;
    for (int m = 1; m <= atoms_; ++m) row[m] = row[m - 1] + prev[m];
  }

  log_factorial_.resize(stride);
  for (int k = 0; k <= atoms_; ++k) log_factorial_[k] = std::lgamma(k + 1.0);

  // Diagonal sub-basis: compositions of N into s diagonal slots.
  std::vector<int> d(levels_, 0);
  d[levels_ - 1] = atoms_;
  while (true) {
    Occupation n(levels_);
    for (int l = 0; l < levels_; ++l) n(l, l) = d[l];
    diagonal_.push_back(rank(n));
    // lexicographic successor of d
    int j = levels_ - 2;
    if (d[levels_ - 1] > 0) {
      ++d[levels_ - 2];
      --d[levels_ - 1];
      continue;
    }
    while (j >= 0 && d[j] == 0) --j;
    if (j <= 0) break;
    const int moved = d[j];
    ++d[j - 1];
    d[j] = 0;
    d[levels_ - 1] = moved - 1;
  }
  std::sort(diagonal_.begin(), diagonal_.end());
  diagonal_log_mult_.reserve(diagonal_.size());
  diagonal_mult_.reserve(diagonal_.size());
  for (auto i : diagonal_) {
    const Occupation n = occupations_of(i);
    diagonal_log_mult_.push_back(log_multiplicity(n));
    diagonal_mult_.push_back(multiplicity(n).value());
  }
}

void Basis::validate(const Occupation& n) const {
  if (n.levels() != levels_) {
    throw ValidationError("occupation has " + std::to_string(n.levels()) + " levels, basis has " +
                          std::to_string(levels_));
  }
  int sum = 0;
  for (int b = 0; b < boxes_; ++b) {
    if (n.flat(b) < 0) throw ValidationError("negative occupation entry in " + n.to_string());
    sum += n.flat(b);
  }
  if (sum != atoms_) {
    throw ValidationError("occupation " + n.to_string() + " sums to " + std::to_string(sum) +
                          ", expected " + std::to_string(atoms_));
  }
}

BasisIndex Basis::rank(const Occupation& n) const {
  std::uint64_t r = 0;
  int remaining = atoms_;
  for (int i = 0; i < boxes_ - 1; ++i) {
    const int x = n.flat(i);
    const int parts = boxes_ - i;  // this slot plus the ones after it
    r += compositions(parts, remaining) - compositions(parts, remaining - x);
    remaining -= x;
  }
  return static_cast<BasisIndex>(r);
}

BasisIndex Basis::index_of(const Occupation& n) const {
  validate(n);
  return rank(n);
}

Occupation Basis::occupations_of(BasisIndex i) const {
  if (i >= dim_) {
    throw ValidationError("basis index " + std::to_string(i) + " out of range [0, " + std::to_string(dim_) + ")");
  }
  Occupation n(levels_);
  std::uint64_t r = i;
  int remaining = atoms_;
  for (int b = 0; b < boxes_ - 1; ++b) {
    const int parts = boxes_ - b;
    const std::uint64_t total = compositions(parts, remaining);
    // largest v with total - compositions(parts, remaining - v) <= r
    int lo = 0, hi = remaining;
    while (lo < hi) {
      const int mid = (lo + hi + 1) / 2;
      if (total - compositions(parts, remaining - mid) <= r)
        lo = mid;
      else
        hi = mid - 1;
    }
    n.flat(b) = lo;
    r -= total - compositions(parts, remaining - lo);
    remaining -= lo;
  }
  n.flat(boxes_ - 1) = remaining;
  return n;
}

Occupation Basis::first() const {
  Occupation n(levels_);
  n.flat(boxes_ - 1) = atoms_;
  return n;
}

bool Basis::next(Occupation& n) const {
  const int last = boxes_ - 1;
  if (n.flat(last) > 0) {
    ++n.flat(last - 1);
    --n.flat(last);
    return true;
  }
  int j = last - 1;
  while (j >= 0 && n.flat(j) == 0) --j;
  if (j <= 0) return false;
  const int moved = n.flat(j);
  ++n.flat(j - 1);
  n.flat(j) = 0;
  n.flat(last) = moved - 1;
  return true;
}

std::vector<Occupation> Basis::enumerate(std::size_t memory_budget) const {
  if (dim_ > memory_budget / sizeof(Occupation)) {
    throw CapacityError("enumerating " + std::to_string(dim_) + " occupation matrices exceeds the " +
                        std::to_string(memory_budget) + " byte budget");
  }
  std::vector<Occupation> out;
  out.reserve(dim_);
  Occupation n = first();
  do {
    out.push_back(n);
  } while (next(n));
  return out;
}

double Basis::log_multiplicity(const Occupation& n) const {
  double lm = log_factorial_[atoms_];
  for (int b = 0; b < boxes_; ++b) lm -= log_factorial_[n.flat(b)];
  return lm;
}

namespace {

Multiplicity multinomial(const Occupation& n) {
  const int atoms = n.total();
  Multiplicity m;
  m.log_value = std::lgamma(atoms + 1.0);
  for (int b = 0; b < n.boxes(); ++b) m.log_value -= std::lgamma(n.flat(b) + 1.0);
  if (atoms <= Multiplicity::kExactMultiplicityLimit) {
    mp::cpp_int c = 1;
    int left = atoms;
    for (int b = 0; b < n.boxes(); ++b) {
      c *= binomial_exact(left, n.flat(b));
      left -= n.flat(b);
    }
    m.exact = c;
  }
  return m;
}

}  // namespace

Multiplicity Basis::multiplicity(const Occupation& n) const {
  validate(n);
  return multinomial(n);
}

std::vector<Occupation> enumerate_basis(int atoms, int levels) { return Basis(atoms, levels).enumerate(); }

std::vector<BasisIndex> diagonal_subbasis(int atoms, int levels) {
  return Basis(atoms, levels).diagonal_subbasis();
}

Multiplicity multiplicity(const Occupation& n) {
  for (int b = 0; b < n.boxes(); ++b)
    if (n.flat(b) < 0) throw ValidationError("negative occupation entry in " + n.to_string());
  return multinomial(n);
}

}  // namespace superrad
