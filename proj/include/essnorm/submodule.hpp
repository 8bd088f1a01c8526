#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "essnorm/lattice.hpp"
#include "essnorm/multi_index.hpp"

namespace essnorm {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kDefaultRankCutoff = 1e-10;

/// Orthonormal basis (columns) of a subspace of C^k.
struct FiberBasis {
  CMatrix basis;
  std::size_t dim() const noexcept { return static_cast<std::size_t>(basis.cols()); }
  std::size_t ambient() const noexcept { return static_cast<std::size_t>(basis.rows()); }
};

namespace detail {

/// Orthonormal basis of the column span of `cols`, keeping left singular
/// vectors whose singular value exceeds `cutoff` after column normalization.
inline CMatrix orthonormal_span(const CMatrix& cols, double cutoff) {
  const auto k = cols.rows();
  if (cols.cols() == 0) return CMatrix(k, 0);
  CMatrix a = cols;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double nrm = a.col(c).norm();
    if (nrm > cutoff) a.col(c) /= nrm;
    else a.col(c).setZero();
  }
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  Eigen::Index rank = 0;
  const auto& s = svd.singularValues();
  while (rank < s.size() && s[rank] > cutoff) ++rank;
  return svd.matrixU().leftCols(rank);
}

/// Orthonormal basis of the orthogonal complement of span(basis) in C^k,
/// obtained by orthogonalizing e_1, ..., e_k in order.
inline CMatrix orthogonal_complement(const CMatrix& basis, double cutoff) {
  const auto k = basis.rows();
  const auto want = k - basis.cols();
  CMatrix out(k, want);
  Eigen::Index found = 0;
  for (Eigen::Index r = 0; r < k && found < want; ++r) {
    CVector v = CVector::Unit(k, r);
    // two passes of classical Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass) {
      if (basis.cols()) v -= basis * (basis.adjoint() * v);
      if (found) v -= out.leftCols(found) * (out.leftCols(found).adjoint() * v);
    }
    const double nrm = v.norm();
    if (nrm > std::max(cutoff, 1e-8)) out.col(found++) = v / nrm;
  }
  return out.leftCols(found);
}

}  // namespace detail

/// A monomial generator z^alpha (x) x of a submodule of M (x) C^k.
struct Generator {
  MultiIndex alpha;
  CVector x;
};

/// Submodule of M_Lambda (x) C^k generated by finitely many monomials
/// z^{alpha^i} (x) x_i.  At each lattice point beta it has the fiber
/// H_beta = span{x_i : alpha^i <= beta}.  k = 1 with x_i = 1 is the scalar
/// submodule M_Lambda(B).
class VectorSubmodule {
public:
  VectorSubmodule() : cache_(std::make_shared<Cache>()) {}

  VectorSubmodule(std::size_t m, std::size_t k, std::vector<Generator> generators, double rank_cutoff = kDefaultRankCutoff)
      : m_(m), k_(k), generators_(std::move(generators)), cutoff_(rank_cutoff), cache_(std::make_shared<Cache>()) {
    if (k == 0) throw std::invalid_argument("multiplicity must be at least 1");
    for (const auto& g : generators_) {
      if (g.alpha.size() != m) throw std::invalid_argument("generator " + g.alpha.str() + " has wrong dimension");
      if (static_cast<std::size_t>(g.x.size()) != k) throw std::invalid_argument("generator vector has wrong length");
      if (g.x.norm() == 0.0) throw std::invalid_argument("generator vector at " + g.alpha.str() + " is zero");
    }
    box_ = MultiIndex(m);
    for (const auto& g : generators_)
      for (std::size_t i = 0; i < m; ++i) box_[i] = std::max(box_[i], g.alpha[i]);
  }

  /// M_Lambda(B) with one unit generator per minimal element of B.
  static VectorSubmodule scalar(const ShiftInvariantSet& b) {
    std::vector<Generator> gens;
    for (const auto& g : b.generators()) gens.push_back({g, CVector::Ones(1)});
    return {b.dimension(), 1, std::move(gens)};
  }

  /// Whole module M_Lambda (x) C^k.
  static VectorSubmodule whole(std::size_t m, std::size_t k) {
    std::vector<Generator> gens;
    for (std::size_t r = 0; r < k; ++r) gens.push_back({MultiIndex::zero(m), CVector::Unit(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r))});
    return {m, k, std::move(gens)};
  }

  std::size_t dimension() const noexcept { return m_; }
  std::size_t multiplicity() const noexcept { return k_; }
  const std::vector<Generator>& generators() const noexcept { return generators_; }
  double rank_cutoff() const noexcept { return cutoff_; }
  bool empty() const noexcept { return generators_.empty(); }
  bool is_scalar() const noexcept { return k_ == 1; }
  /// Componentwise max of the generator exponents; fibers are constant in
  /// every coordinate beyond it.
  const MultiIndex& generator_box() const noexcept { return box_; }

  /// Exponent set of the generators' cones (the support of S).
  ShiftInvariantSet support() const {
    std::vector<MultiIndex> pts;
    for (const auto& g : generators_) pts.push_back(g.alpha);
    return {m_, std::move(pts)};
  }

  std::vector<bool> pattern(const MultiIndex& b) const {
    check(b);
    std::vector<bool> p(generators_.size());
    for (std::size_t i = 0; i < generators_.size(); ++i) p[i] = generators_[i].alpha.divides(b);
    return p;
  }

  /// Orthonormal basis of H_beta.  Memoized per activation pattern.
  std::shared_ptr<const FiberBasis> fiber(const MultiIndex& b) const { return entry(pattern(b)).fiber; }

  /// Orthonormal basis of H_beta^perp in C^k.
  std::shared_ptr<const FiberBasis> quotient_fiber(const MultiIndex& b) const { return entry(pattern(b)).complement; }

  std::size_t fiber_dim(const MultiIndex& b) const { return fiber(b)->dim(); }

  /// Number of distinct activation patterns seen so far.
  std::size_t cached_patterns() const {
    std::shared_lock lock(cache_->mutex);
    return cache_->entries.size();
  }

private:
  struct Entry {
    std::shared_ptr<const FiberBasis> fiber;
    std::shared_ptr<const FiberBasis> complement;
  };
  struct Cache {
    mutable std::shared_mutex mutex;
    std::map<std::vector<bool>, Entry> entries;
  };

  void check(const MultiIndex& b) const {
    if (b.size() != m_) throw std::invalid_argument("index " + b.str() + " has wrong dimension");
  }

  Entry entry(const std::vector<bool>& p) const {
    {
      std::shared_lock lock(cache_->mutex);
      if (auto it = cache_->entries.find(p); it != cache_->entries.end()) return it->second;
    }
    Entry e = compute(p);
    std::unique_lock lock(cache_->mutex);
    return cache_->entries.emplace(p, std::move(e)).first->second;
  }

  Entry compute(const std::vector<bool>& p) const {
    const auto k = static_cast<Eigen::Index>(k_);
    std::vector<Eigen::Index> active;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i]) active.push_back(static_cast<Eigen::Index>(i));
    Entry e;
    if (k_ == 1) {
      const bool on = !active.empty();
      e.fiber = std::make_shared<FiberBasis>(FiberBasis{on ? CMatrix::Ones(1, 1) : CMatrix(1, 0)});
      e.complement = std::make_shared<FiberBasis>(FiberBasis{on ? CMatrix(1, 0) : CMatrix::Ones(1, 1)});
      return e;
    }
    CMatrix cols(k, static_cast<Eigen::Index>(active.size()));
    for (std::size_t c = 0; c < active.size(); ++c) cols.col(static_cast<Eigen::Index>(c)) = generators_[static_cast<std::size_t>(active[c])].x;
    CMatrix basis = detail::orthonormal_span(cols, cutoff_);
    e.complement = std::make_shared<FiberBasis>(FiberBasis{detail::orthogonal_complement(basis, cutoff_)});
    e.fiber = std::make_shared<FiberBasis>(FiberBasis{std::move(basis)});
    return e;
  }

  std::size_t m_ = 0;
  std::size_t k_ = 1;
  std::vector<Generator> generators_;
  double cutoff_ = kDefaultRankCutoff;
  MultiIndex box_;
  std::shared_ptr<Cache> cache_;
};

/// Fiber growth along one axis: H at base + t e_axis for t = 0, 1, ...
/// Breakpoints are the smallest levels at which the dimension jumps; the
/// jump space at n_i is H_{n_i} minus H_{n_{i-1}} (orthogonal difference).
struct Filtration {
  MultiIndex base;
  std::size_t axis = 0;
  std::vector<int> breakpoints;
  std::vector<CMatrix> jump_spaces;
  CMatrix final_fiber;
  std::size_t final_dim() const noexcept { return static_cast<std::size_t>(final_fiber.cols()); }
};

/// Sweep the coordinate `axis` of `base` upward from 0 (the entry of base
/// on that axis is ignored).  Stabilizes once the sweep passes every
/// generator's entry on the axis.
inline Filtration filtration_along(const VectorSubmodule& s, MultiIndex base, std::size_t axis) {
  if (axis >= s.dimension()) throw std::invalid_argument("moving axis out of range");
  if (base.size() != s.dimension()) throw std::invalid_argument("base point has wrong dimension");
  Filtration f;
  f.axis = axis;
  base[axis] = 0;
  f.base = base;
  const int stop = s.generator_box()[axis];
  CMatrix prev(static_cast<Eigen::Index>(s.multiplicity()), 0);
  for (int t = 0; t <= stop; ++t) {
    base[axis] = t;
    const auto fib = s.fiber(base);
    if (fib->dim() > static_cast<std::size_t>(prev.cols())) {
      CMatrix residual = fib->basis;
      if (prev.cols()) residual -= prev * (prev.adjoint() * residual);
      f.breakpoints.push_back(t);
      f.jump_spaces.push_back(detail::orthonormal_span(residual, s.rank_cutoff()));
      prev = fib->basis;
    }
  }
  f.final_fiber = prev;
  return f;
}

/// Filtration with the listed axes frozen; together with the moving axis
/// they must cover every coordinate.
inline Filtration filtration_along(const VectorSubmodule& s, const std::vector<AxisLevel>& frozen, std::size_t moving) {
  MultiIndex base(s.dimension());
  std::vector<bool> covered(s.dimension(), false);
  if (moving >= s.dimension()) throw std::invalid_argument("moving axis out of range");
  covered[moving] = true;
  for (const auto& f : frozen) {
    if (f.axis >= s.dimension() || covered[f.axis]) throw std::invalid_argument("frozen axes must be distinct and differ from the moving axis");
    covered[f.axis] = true;
    base[f.axis] = f.level;
  }
  for (bool c : covered)
    if (!c) throw std::invalid_argument("frozen axes plus the moving axis must cover every coordinate");
  return filtration_along(s, base, moving);
}

}  // namespace essnorm
