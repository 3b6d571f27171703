#include "superrad/generator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "superrad/algebra.hpp"
#include "superrad/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace superrad {

namespace {

constexpr double kDropTolerance = 1e-15;
const cplx kI{0.0, 1.0};

struct Action {
  enum Kind { Left, Right, Sandwich, LeftPair, RightPair, Both } kind;
  int a, b, c, d;
  cplx factor;
};

enum class DrivePart { Both, Raise, Lower };

void add_commutator_single(std::vector<Action>& acts, int a, int b, cplx h) {
  // i [h sigma_ab, X] = i h sigma_ab X - i h X sigma_ab
  acts.push_back({Action::Left, a, b, 0, 0, kI * h});
  acts.push_back({Action::Right, a, b, 0, 0, -kI * h});
}

std::vector<Action> collect_actions(const SystemParams& p, const CollectiveRates* r, TermSet terms,
                                    DrivePart drive_part) {
  const int s = p.levels;
  std::vector<Action> acts;

  if (terms.atomic) {
    for (int l = 0; l < s; ++l) {
      const double w = p.frame_frequency(l);
      if (w != 0.0) add_commutator_single(acts, l, l, w);
    }
  }

  if (terms.drive) {
    for (int l = 0; l < s; ++l) {
      for (int lp = 0; lp < l; ++lp) {
        const cplx v = p.drive(l, lp);
        if (v == cplx{0.0, 0.0}) continue;
        if (drive_part != DrivePart::Lower) add_commutator_single(acts, l, lp, v);
        if (drive_part != DrivePart::Raise) add_commutator_single(acts, lp, l, std::conj(v));
      }
    }
  }

  if (terms.lamb_shift && r) {
    for (int l = 0; l < s; ++l) {
      for (int lp = 0; lp < l; ++lp) {
        const double om = r->Omega(l, lp);
        if (om == 0.0) continue;
        acts.push_back({Action::LeftPair, l, lp, lp, l, kI * om});
        acts.push_back({Action::RightPair, l, lp, lp, l, -kI * om});
      }
    }
  }

  if (terms.individual_dissipation) {
    // jump operator sigma^j_{l'l} with rate gamma(l, l')
    for (int l = 0; l < s; ++l) {
      for (int lp = 0; lp < s; ++lp) {
        const double g = (l == lp) ? 0.0 : p.gamma(l, lp);
        if (g == 0.0) continue;
        acts.push_back({Action::Left, l, l, 0, 0, -0.5 * g});
        acts.push_back({Action::Right, l, l, 0, 0, -0.5 * g});
        acts.push_back({Action::Sandwich, l, lp, lp, l, g});
      }
    }
  }

  if (terms.dephasing) {
    // jump operator sigma^j_ll - sigma^j_l'l'
    for (int l = 0; l < s; ++l) {
      for (int lp = 0; lp < l; ++lp) {
        const double x = p.xi(l, lp);
        if (x == 0.0) continue;
        for (int k : {l, lp}) {
          acts.push_back({Action::Left, k, k, 0, 0, -0.5 * x});
          acts.push_back({Action::Right, k, k, 0, 0, -0.5 * x});
        }
        acts.push_back({Action::Sandwich, l, l, l, l, x});
        acts.push_back({Action::Sandwich, l, l, lp, lp, -x});
        acts.push_back({Action::Sandwich, lp, lp, l, l, -x});
        acts.push_back({Action::Sandwich, lp, lp, lp, lp, x});
      }
    }
  }

  if (terms.collective_decay && r) {
    // jump operator sigma_{l'l} (collective) with rate Gamma(l, l')
    for (int l = 0; l < s; ++l) {
      for (int lp = 0; lp < l; ++lp) {
        const double g = r->Gamma(l, lp);
        if (g == 0.0) continue;
        acts.push_back({Action::LeftPair, l, lp, lp, l, -0.5 * g});
        acts.push_back({Action::RightPair, l, lp, lp, l, -0.5 * g});
        acts.push_back({Action::Both, l, lp, lp, l, g});
      }
    }
  }
  return acts;
}

void expand_row(const Occupation& n, const std::vector<Action>& acts, FormalSum& out, FormalSum& scratch) {
  out.clear();
  const FormalTerm seed{n, 1.0};
  for (const auto& act : acts) {
    switch (act.kind) {
      case Action::Left:
        algebra::left(act.a, act.b, seed, act.factor, out);
        break;
      case Action::Right:
        algebra::right(act.a, act.b, seed, act.factor, out);
        break;
      case Action::Sandwich:
        algebra::sandwich(act.a, act.b, act.c, act.d, seed, act.factor, out);
        break;
      case Action::LeftPair:
        algebra::left_pair(act.a, act.b, act.c, act.d, seed, act.factor, out, scratch);
        break;
      case Action::RightPair:
        algebra::right_pair(act.a, act.b, act.c, act.d, seed, act.factor, out, scratch);
        break;
      case Action::Both:
        algebra::both(act.a, act.b, act.c, act.d, seed, act.factor, out, scratch);
        break;
    }
  }
}

struct RowBlock {
  std::vector<std::uint64_t> row_nnz;
  std::vector<std::uint32_t> cols;
  std::vector<cplx> vals;
};

void assemble_rows(const Basis& basis, const std::vector<Action>& acts, std::size_t begin, std::size_t end,
                   RowBlock& block) {
  FormalSum out, scratch;
  std::vector<std::pair<std::uint32_t, cplx>> row;
  block.row_nnz.reserve(end - begin);
  if (begin == end) return;
  Occupation n = basis.occupations_of(begin);
  for (std::size_t i = begin; i < end; ++i) {
    expand_row(n, acts, out, scratch);
    row.clear();
    for (const auto& t : out) {
      row.emplace_back(static_cast<std::uint32_t>(basis.rank(t.n)), t.coef);
    }
    std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::uint64_t count = 0;
    for (std::size_t k = 0; k < row.size();) {
      const auto col = row[k].first;
      cplx sum = row[k].second;
      for (++k; k < row.size() && row[k].first == col; ++k) sum += row[k].second;
      if (sum != cplx{0.0, 0.0}) {
        block.cols.push_back(col);
        block.vals.push_back(sum);
        ++count;
      }
    }
    block.row_nnz.push_back(count);
    if (i + 1 < end) basis.next(n);
  }
}

SparseMatrix assemble(const Basis& basis, const std::vector<Action>& acts) {
  const std::size_t dim = basis.size();
  if (dim > std::numeric_limits<std::uint32_t>::max()) {
    throw CapacityError("generator dimension " + std::to_string(dim) + " exceeds 32-bit indexing");
  }
  int blocks_n = 1;
#ifdef _OPENMP
  blocks_n = std::max(1, omp_get_max_threads());
#endif
  std::vector<RowBlock> blocks(static_cast<std::size_t>(blocks_n));
#pragma omp parallel for schedule(static, 1)
  for (int b = 0; b < blocks_n; ++b) {
    const std::size_t begin = dim * static_cast<std::size_t>(b) / blocks_n;
    const std::size_t end = dim * static_cast<std::size_t>(b + 1) / blocks_n;
    assemble_rows(basis, acts, begin, end, blocks[static_cast<std::size_t>(b)]);
  }

  std::vector<std::uint64_t> row_ptr;
  row_ptr.reserve(dim + 1);
  row_ptr.push_back(0);
  std::vector<std::uint32_t> cols;
  std::vector<cplx> vals;
  if (blocks.size() == 1) {
    cols = std::move(blocks[0].cols);
    vals = std::move(blocks[0].vals);
    for (auto c : blocks[0].row_nnz) row_ptr.push_back(row_ptr.back() + c);
  } else {
    for (auto& blk : blocks) {
      for (auto c : blk.row_nnz) row_ptr.push_back(row_ptr.back() + c);
      cols.insert(cols.end(), blk.cols.begin(), blk.cols.end());
      vals.insert(vals.end(), blk.vals.begin(), blk.vals.end());
      blk = RowBlock{};
    }
  }

  // Drop numerical noise relative to the largest entry.
  double vmax = 0.0;
  for (const auto& v : vals) vmax = std::max(vmax, std::abs(v));
  const double cut = kDropTolerance * vmax;
  std::size_t w = 0;
  std::uint64_t start = 0;
  for (std::size_t r = 0; r < dim; ++r) {
    const auto stop = row_ptr[r + 1];
    for (auto k = start; k < stop; ++k) {
      if (std::abs(vals[k]) >= cut && vals[k] != cplx{0.0, 0.0}) {
        cols[w] = cols[k];
        vals[w] = vals[k];
        ++w;
      }
    }
    start = stop;
    row_ptr[r + 1] = w;
  }
  cols.resize(w);
  vals.resize(w);
  cols.shrink_to_fit();
  vals.shrink_to_fit();
  return SparseMatrix(dim, std::move(row_ptr), std::move(cols), std::move(vals));
}

void check_basis(const Basis& basis, const SystemParams& p) {
  if (basis.atoms() != p.atoms || basis.levels() != p.levels) {
    throw ValidationError("basis (N=" + std::to_string(basis.atoms()) + ", s=" + std::to_string(basis.levels()) +
                          ") does not match parameters (N=" + std::to_string(p.atoms) +
                          ", s=" + std::to_string(p.levels) + ")");
  }
}

void check_rotating_drive(const SystemParams& p) {
  for (int l = 0; l < p.levels; ++l) {
    for (int lp = 0; lp < l; ++lp) {
      if (p.drive(l, lp) == cplx{0.0, 0.0}) continue;
      if ((p.rung(l) - p.rung(lp) - 1) * p.omega_d != 0.0) {
        throw FrameError("drive on pair (" + std::to_string(l) + "," + std::to_string(lp) +
                         ") is not stationary in the rotating frame (rung difference " +
                         std::to_string(p.rung(l) - p.rung(lp)) + ")");
      }
    }
  }
}

Generator build(std::shared_ptr<const Basis> basis, const SystemParams& p, const CollectiveRates* r, TermSet terms,
                DrivePart part) {
  p.validate();
  check_basis(*basis, p);
  const auto acts = collect_actions(p, r, terms, part);
  auto m = assemble(*basis, acts);
  return Generator(std::move(basis), std::move(m), p.frame);
}

}  // namespace

Generator build_generator(std::shared_ptr<const Basis> basis, const SystemParams& p, const CollectiveRates& r,
                          TermSet terms) {
  if (terms.drive && p.has_drive()) {
    if (p.frame == Frame::Lab) {
      throw FrameError("lab-frame drive makes the generator time dependent; use build_lab_frame_generator");
    }
    check_rotating_drive(p);
  }
  return build(std::move(basis), p, &r, terms, DrivePart::Both);
}

Generator build_generator(const SystemParams& p, const CollectiveRates& r, TermSet terms) {
  return build_generator(std::make_shared<const Basis>(p.atoms, p.levels), p, r, terms);
}

namespace {
TermSet only(bool TermSet::*flag) {
  TermSet t = TermSet::none();
  t.*flag = true;
  return t;
}
}  // namespace

Generator contribution_atomic(std::shared_ptr<const Basis> basis, const SystemParams& p) {
  return build(std::move(basis), p, nullptr, only(&TermSet::atomic), DrivePart::Both);
}

Generator contribution_drive(std::shared_ptr<const Basis> basis, const SystemParams& p) {
  if (p.has_drive() && p.frame == Frame::Rotating) check_rotating_drive(p);
  return build(std::move(basis), p, nullptr, only(&TermSet::drive), DrivePart::Both);
}

Generator contribution_lamb_shift(std::shared_ptr<const Basis> basis, const SystemParams& p,
                                  const CollectiveRates& r) {
  return build(std::move(basis), p, &r, only(&TermSet::lamb_shift), DrivePart::Both);
}

Generator contribution_individual_dissipation(std::shared_ptr<const Basis> basis, const SystemParams& p) {
  return build(std::move(basis), p, nullptr, only(&TermSet::individual_dissipation), DrivePart::Both);
}

Generator contribution_dephasing(std::shared_ptr<const Basis> basis, const SystemParams& p) {
  return build(std::move(basis), p, nullptr, only(&TermSet::dephasing), DrivePart::Both);
}

Generator contribution_collective_decay(std::shared_ptr<const Basis> basis, const SystemParams& p,
                                        const CollectiveRates& r) {
  return build(std::move(basis), p, &r, only(&TermSet::collective_decay), DrivePart::Both);
}

LabFrameGenerator build_lab_frame_generator(std::shared_ptr<const Basis> basis, const SystemParams& p,
                                            const CollectiveRates& r, TermSet terms) {
  SystemParams lab = p;
  lab.frame = Frame::Lab;
  TermSet static_terms = terms;
  static_terms.drive = false;
  TermSet drive_only = TermSet::none();
  drive_only.drive = terms.drive;
  return LabFrameGenerator{build(basis, lab, &r, static_terms, DrivePart::Both),
                           build(basis, lab, &r, drive_only, DrivePart::Raise),
                           build(basis, lab, &r, drive_only, DrivePart::Lower)};
}

void dump_coordinates(const Generator& g, std::ostream& os) {
  const auto& m = g.matrix();
  const auto rp = m.row_ptr();
  const auto ci = m.cols();
  const auto v = m.values();
  const auto old = os.precision(17);
  os << "# dim " << m.dim() << " nnz " << m.nnz() << '\n';
  for (std::size_t r = 0; r < m.dim(); ++r)
    for (auto k = rp[r]; k < rp[r + 1]; ++k) os << r << ' ' << ci[k] << ' ' << v[k].real() << ' ' << v[k].imag() << '\n';
  os.precision(old);
}

std::vector<double> trace_weights(const Basis& basis) {
  std::vector<double> w(basis.size(), 0.0);
  const auto& diag = basis.diagonal_subbasis();
  const auto& c = basis.diagonal_multiplicity();
  for (std::size_t k = 0; k < diag.size(); ++k) w[diag[k]] = c[k];
  return w;
}

}  // namespace superrad
