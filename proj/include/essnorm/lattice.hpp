#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "essnorm/multi_index.hpp"

namespace essnorm {

/// A coordinate fixed at a level; lists of these describe the multi-slices
/// {alpha : alpha_{i_j} = k_j}.
struct AxisLevel {
  std::size_t axis = 0;
  int level = 0;
  friend bool operator==(const AxisLevel&, const AxisLevel&) = default;
};

/// Shift-invariant subset of A_m, stored by its antichain of minimal
/// generators.  An empty generator list is the empty set (zero submodule).
class ShiftInvariantSet {
public:
  ShiftInvariantSet() = default;

  /// Accepts any generating set; redundant generators are discarded.
  ShiftInvariantSet(std::size_t m, std::vector<MultiIndex> generators) : m_(m) {
    for (const auto& g : generators)
      if (g.size() != m) throw std::invalid_argument("generator " + g.str() + " has wrong dimension");
    generators_ = minimal_elements(std::move(generators));
  }

  static ShiftInvariantSet full(std::size_t m) { return {m, {MultiIndex::zero(m)}}; }
  static ShiftInvariantSet none(std::size_t m) { return {m, {}}; }
  static ShiftInvariantSet cone(const MultiIndex& a) { return {a.size(), {a}}; }

  std::size_t dimension() const noexcept { return m_; }
  const std::vector<MultiIndex>& generators() const noexcept { return generators_; }
  bool empty() const noexcept { return generators_.empty(); }
  bool is_cone() const noexcept { return generators_.size() == 1; }

  bool contains(const MultiIndex& b) const noexcept {
    for (const auto& g : generators_)
      if (g.divides(b)) return true;
    return false;
  }

  friend bool operator==(const ShiftInvariantSet& a, const ShiftInvariantSet& b) noexcept {
    return a.m_ == b.m_ && a.generators_ == b.generators_;
  }

  /// Minimal elements of a finite point set under the componentwise order,
  /// sorted lexicographically with duplicates removed.
  static std::vector<MultiIndex> minimal_elements(std::vector<MultiIndex> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    // A dominating point is lex-greater than the point it dominates, so one
    // forward pass over the sorted list suffices.
    std::vector<MultiIndex> out;
    for (const auto& p : pts) {
      bool dominated = false;
      for (const auto& q : out)
        if (q.divides(p)) {
          dominated = true;
          break;
        }
      if (!dominated) out.push_back(p);
    }
    return out;
  }

private:
  std::size_t m_ = 0;
  std::vector<MultiIndex> generators_;
};

/// Smallest shift-invariant superset of C.
inline ShiftInvariantSet closure(std::size_t m, std::vector<MultiIndex> c) { return {m, std::move(c)}; }

inline std::vector<MultiIndex> minimal_generators(const ShiftInvariantSet& b) { return b.generators(); }

/// Componentwise minimum over the generators; B is contained in B(corner).
inline MultiIndex corner(const ShiftInvariantSet& b) {
  if (b.empty()) throw std::domain_error("empty set has no corner");
  MultiIndex c = b.generators().front();
  for (const auto& g : b.generators())
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::min(c[i], g[i]);
  return c;
}

/// B(corner) \ B.  `finite` is false when the difference contains the ray
/// base + t e_axis for all t, in which case `witness_axis` names the ray.
struct CofiniteDifference {
  bool finite = true;
  MultiIndex corner;
  /// Upper corner of the certifying box [corner, box_hi] (finite case).
  MultiIndex box_hi;
  std::vector<MultiIndex> points;
  std::optional<std::size_t> witness_axis;
};

inline CofiniteDifference cofinite_difference(const ShiftInvariantSet& b) {
  CofiniteDifference r;
  r.corner = corner(b);
  const std::size_t m = b.dimension();
  r.box_hi = r.corner;
  // The complement of B inside the cone is a down-set relative to the
  // corner, so it is infinite iff it contains a ray from the corner along
  // some axis.  The ray along i meets B iff some generator agrees with the
  // corner off axis i; the smallest such g_i bounds the box on axis i.
  for (std::size_t i = 0; i < m; ++i) {
    std::optional<int> reach;
    for (const auto& g : b.generators()) {
      bool on_ray = true;
      for (std::size_t j = 0; j < m && on_ray; ++j)
        if (j != i && g[j] != r.corner[j]) on_ray = false;
      if (on_ray) reach = reach ? std::min(*reach, g[i]) : g[i];
    }
    if (!reach) {
      r.finite = false;
      r.witness_axis = i;
      return r;
    }
    r.box_hi[i] = *reach;
  }
  for_each_in_box(r.corner, r.box_hi, [&](const MultiIndex& p) {
    if (!b.contains(p)) r.points.push_back(p);
  });
  return r;
}

/// {alpha in B : alpha_axis = level}, re-indexed over A_{m-1}.
inline ShiftInvariantSet slice(const ShiftInvariantSet& b, std::size_t axis, int level) {
  if (axis >= b.dimension()) throw std::invalid_argument("slice axis out of range");
  if (level < 0) throw std::invalid_argument("slice level must be nonnegative");
  std::vector<MultiIndex> gens;
  for (const auto& g : b.generators())
    if (g[axis] <= level) gens.push_back(g.without(axis));
  return {b.dimension() - 1, std::move(gens)};
}

/// Multi-slice: every listed axis fixed at its level.  The result is indexed
/// by the remaining axes in increasing order.
inline ShiftInvariantSet slice(const ShiftInvariantSet& b, std::vector<AxisLevel> fixed) {
  std::sort(fixed.begin(), fixed.end(), [](const AxisLevel& x, const AxisLevel& y) { return x.axis > y.axis; });
  for (std::size_t t = 1; t < fixed.size(); ++t)
    if (fixed[t].axis == fixed[t - 1].axis) throw std::invalid_argument("multi-slice repeats an axis");
  ShiftInvariantSet s = b;
  for (const auto& f : fixed) s = slice(s, f.axis, f.level);
  return s;
}

inline std::vector<MultiIndex> shell(std::size_t m, long n) {
  std::vector<MultiIndex> out;
  out.reserve(shell_size(m, n));
  for_each_in_shell(m, n, [&](const MultiIndex& a) { out.push_back(a); });
  return out;
}

inline std::vector<MultiIndex> shell(const ShiftInvariantSet& b, long n) {
  std::vector<MultiIndex> out;
  for_each_in_shell(b.dimension(), n, [&](const MultiIndex& a) {
    if (b.contains(a)) out.push_back(a);
  });
  return out;
}

/// Minimal coordinate sets S such that zeroing the coordinates in S kills
/// every monomial z^alpha, alpha in C (minimal hitting sets of the supports).
/// Axes are 0-based; the result is sorted lexicographically.
inline std::vector<std::vector<std::size_t>> common_zero_coordinates(const std::vector<MultiIndex>& c) {
  if (c.empty()) throw std::invalid_argument("common zero set needs at least one monomial");
  const std::size_t m = c.front().size();
  if (m > 24) throw std::invalid_argument("too many variables for exhaustive hitting-set search");
  std::vector<std::uint32_t> supports;
  for (const auto& a : c) {
    if (a.size() != m) throw std::invalid_argument("monomials of mixed dimension");
    std::uint32_t s = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (a[i] > 0) s |= 1u << i;
    if (s == 0) throw std::domain_error("unit monomial has empty zero set");
    supports.push_back(s);
  }
  auto hits = [&](std::uint32_t mask) {
    return std::all_of(supports.begin(), supports.end(), [mask](std::uint32_t s) { return (s & mask) != 0; });
  };
  std::vector<std::vector<std::size_t>> out;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    if (!hits(mask)) continue;
    bool minimal = true;
    for (std::uint32_t rest = mask; rest && minimal; rest &= rest - 1) {
      const std::uint32_t bit = rest & (~rest + 1);
      if (hits(mask ^ bit)) minimal = false;
    }
    if (!minimal) continue;
    std::vector<std::size_t> axes;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) axes.push_back(i);
    out.push_back(std::move(axes));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace essnorm
