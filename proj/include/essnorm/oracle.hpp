#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "essnorm/lattice.hpp"
#include "essnorm/multi_index.hpp"
#include "essnorm/shiftops.hpp"
#include "essnorm/submodule.hpp"
#include "essnorm/weights.hpp"

namespace essnorm {

/// Brute-force truncation to degree <= N with explicit matrices.  Fiber bases
/// come from a pivoted Householder QR, shift entries from lambda quotients,
/// and every compression or commutator is a literal matrix product.  Nothing
/// is shared with the lattice-operator path except the weight evaluator.
class DenseTruncation {
public:
  static constexpr long kMaxDegreeSmallM = 16;
  static constexpr Eigen::Index kMaxAmbient = 6000;

  static DenseTruncation build(const WeightSet& w, DomainKind kind, const std::optional<VectorSubmodule>& s, long max_degree) {
    const std::size_t m = w.dimension();
    const std::size_t k = s ? s->multiplicity() : 1;
    if (s && s->dimension() != m) throw std::invalid_argument("weights and submodule differ in dimension");
    if (kind != DomainKind::ambient && !s) throw std::invalid_argument("submodule and quotient truncations need a submodule");
    if (max_degree < 0) throw std::invalid_argument("truncation degree must be nonnegative");
    if (m <= 3 && max_degree > kMaxDegreeSmallM)
      throw std::length_error("dense truncation limited to N <= " + std::to_string(kMaxDegreeSmallM) + " for m <= 3");
    DenseTruncation t;
    t.m_ = m;
    t.k_ = k;
    t.n_ = max_degree;
    t.kind_ = kind;
    for (long n = 0; n <= max_degree; ++n) {
      t.shell_start_.push_back(t.points_.size());
      for_each_in_shell(m, n, [&](const MultiIndex& b) { t.points_.push_back(b); });
    }
    t.shell_start_.push_back(t.points_.size());
    const auto ambient = static_cast<Eigen::Index>(t.points_.size() * k);
    if (ambient > kMaxAmbient) throw std::length_error("dense truncation too large (" + std::to_string(ambient) + " ambient rows)");
    for (std::size_t p = 0; p < t.points_.size(); ++p) t.index_.emplace(t.points_[p], p);

    // Fiber bases and the embedding E: domain -> ambient.
    std::vector<CMatrix> fibers;
    Eigen::Index dim = 0;
    for (const auto& b : t.points_) {
      fibers.push_back(t.fiber_basis(b, s));
      t.domain_offset_.push_back(dim);
      dim += fibers.back().cols();
    }
    t.domain_offset_.push_back(dim);
    t.embed_ = CMatrix::Zero(ambient, dim);
    const auto kk = static_cast<Eigen::Index>(k);
    for (std::size_t p = 0; p < t.points_.size(); ++p)
      t.embed_.block(static_cast<Eigen::Index>(p) * kk, t.domain_offset_[p], kk, fibers[p].cols()) = fibers[p];

    // Ambient shifts: e_b (x) v -> (lambda_{b+e_i} / lambda_b) e_{b+e_i} (x) v.
    for (std::size_t i = 0; i < m; ++i) {
      CMatrix z = CMatrix::Zero(ambient, ambient);
      for (std::size_t p = 0; p < t.points_.size(); ++p) {
        const MultiIndex up = t.points_[p].plus_unit(i);
        if (up.degree() > max_degree) continue;
        const double v = w.lambda(up) / w.lambda(t.points_[p]);
        const auto q = static_cast<Eigen::Index>(t.index_.at(up));
        for (Eigen::Index r = 0; r < kk; ++r) z(q * kk + r, static_cast<Eigen::Index>(p) * kk + r) = v;
      }
      t.z_ambient_.push_back(std::move(z));
    }
    for (std::size_t i = 0; i < m; ++i) t.z_.push_back(t.embed_.adjoint() * t.z_ambient_[i] * t.embed_);
    return t;
  }

  std::size_t dimension() const noexcept { return m_; }
  std::size_t multiplicity() const noexcept { return k_; }
  long max_degree() const noexcept { return n_; }
  DomainKind kind() const noexcept { return kind_; }
  Eigen::Index size() const noexcept { return embed_.cols(); }
  Eigen::Index ambient_size() const noexcept { return embed_.rows(); }
  const std::vector<MultiIndex>& points() const noexcept { return points_; }
  const CMatrix& embedding() const noexcept { return embed_; }

  /// Compression of Z_i to the domain (domain coordinates).
  const CMatrix& shift(std::size_t i) const { return z_.at(i); }
  CMatrix adjoint_shift(std::size_t i) const { return shift(i).adjoint(); }
  /// [T_i^*, T_j] = T_i^* T_j - T_j T_i^*.
  CMatrix commutator(std::size_t i, std::size_t j) const {
    const CMatrix& ti = shift(i);
    const CMatrix& tj = shift(j);
    return ti.adjoint() * tj - tj * ti.adjoint();
  }
  /// X_i^* X_i with X_i = Z_i restricted to the domain (target uncompressed).
  CMatrix edge_gram(std::size_t i) const {
    const CMatrix x = z_ambient_.at(i) * embed_;
    return x.adjoint() * x;
  }
  /// E X E^*: a domain-coordinate matrix in ambient coordinates.
  CMatrix to_ambient(const CMatrix& x) const { return embed_ * x * embed_.adjoint(); }

  /// Singular values (descending) of the columns of x belonging to shell n.
  std::vector<double> shell_singular_values(const CMatrix& x, long n) const {
    if (n < 0 || n > n_) throw std::invalid_argument("shell outside the truncation");
    const auto lo = domain_offset_[shell_start_[static_cast<std::size_t>(n)]];
    const auto hi = domain_offset_[shell_start_[static_cast<std::size_t>(n) + 1]];
    if (hi == lo) return {};
    const CMatrix cols = x.middleCols(lo, hi - lo);
    Eigen::JacobiSVD<CMatrix> svd(cols);
    std::vector<double> out(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
    return out;
  }

  std::optional<std::size_t> point_index(const MultiIndex& b) const {
    auto it = index_.find(b);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

private:
  CMatrix fiber_basis(const MultiIndex& b, const std::optional<VectorSubmodule>& s) const {
    const auto kk = static_cast<Eigen::Index>(k_);
    if (kind_ == DomainKind::ambient) return CMatrix::Identity(kk, kk);
    std::vector<CVector> cols;
    for (const auto& g : s->generators())
      if (g.alpha.divides(b)) cols.push_back(g.x / g.x.norm());
    CMatrix a(kk, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) a.col(static_cast<Eigen::Index>(c)) = cols[c];
    Eigen::Index rank = 0;
    CMatrix q = CMatrix::Identity(kk, kk);
    if (a.cols()) {
      Eigen::ColPivHouseholderQR<CMatrix> qr(a);
      qr.setThreshold(s->rank_cutoff());
      rank = qr.rank();
      q = qr.householderQ() * CMatrix::Identity(kk, kk);
    }
    return kind_ == DomainKind::submodule ? CMatrix(q.leftCols(rank)) : CMatrix(q.rightCols(kk - rank));
  }

  std::size_t m_ = 0;
  std::size_t k_ = 1;
  long n_ = 0;
  DomainKind kind_ = DomainKind::ambient;
  std::vector<MultiIndex> points_;
  std::vector<std::size_t> shell_start_;
  std::map<MultiIndex, std::size_t> index_;
  std::vector<Eigen::Index> domain_offset_;
  CMatrix embed_;
  std::vector<CMatrix> z_ambient_;
  std::vector<CMatrix> z_;
};

/// The lattice operator assembled as an ambient-coordinate matrix on the
/// truncation (blocks leaving degree N are dropped).
inline CMatrix assemble_ambient(const LatticeOperator& op, const DenseTruncation& t) {
  const auto kk = static_cast<Eigen::Index>(t.multiplicity());
  CMatrix out = CMatrix::Zero(t.ambient_size(), t.ambient_size());
  const Domain& d = op.domain();
  MultiIndex tgt;
  for (std::size_t p = 0; p < t.points().size(); ++p) {
    const MultiIndex& b = t.points()[p];
    if (!op.target(b, tgt)) continue;
    const auto q = t.point_index(tgt);
    if (!q) continue;
    const CMatrix blk = op.coefficient(b);
    if (blk.rows() == 0 || blk.cols() == 0) continue;
    const auto src = d.basis(b);
    const auto dst = d.basis(tgt);
    out.block(static_cast<Eigen::Index>(*q) * kk, static_cast<Eigen::Index>(p) * kk, kk, kk) += dst->basis * blk * src->basis.adjoint();
  }
  return out;
}

/// Max-abs deviation between op and a dense domain-coordinate matrix, both
/// in ambient coordinates, over rows and columns of degree <= N - 1.
inline double compare(const LatticeOperator& op, const DenseTruncation& t, const CMatrix& dense) {
  if (op.dimension() != t.dimension()) throw std::invalid_argument("operator and truncation differ in dimension");
  if (op.domain().multiplicity() != t.multiplicity()) throw std::invalid_argument("operator and truncation differ in multiplicity");
  const CMatrix lhs = assemble_ambient(op, t);
  const CMatrix rhs = t.to_ambient(dense);
  const auto kk = static_cast<Eigen::Index>(t.multiplicity());
  std::vector<Eigen::Index> idx;
  for (std::size_t p = 0; p < t.points().size(); ++p)
    if (t.points()[p].degree() <= t.max_degree() - 1)
      for (Eigen::Index r = 0; r < kk; ++r) idx.push_back(static_cast<Eigen::Index>(p) * kk + r);
  double worst = 0.0;
  for (auto c : idx)
    for (auto r : idx) worst = std::max(worst, std::abs(lhs(r, c) - rhs(r, c)));
  return worst;
}

/// Max-abs deviation between sorted singular-value lists, the shorter
/// padded with zeros.
inline double compare_singular_values(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end(), std::greater<>());
  std::sort(b.begin(), b.end(), std::greater<>());
  const std::size_t n = std::max(a.size(), b.size());
  a.resize(n, 0.0);
  b.resize(n, 0.0);
  double worst = 0.0;
  for (std::size_t t = 0; t < n; ++t) worst = std::max(worst, std::abs(a[t] - b[t]));
  return worst;
}

/// The 2x2 block identities for Z_i split along N = M(B) and its complement,
/// computed from projections on a dense scalar truncation.
struct DenseBlockResidues {
  double residue_sub = 0.0;
  double residue_quot = 0.0;
  double c_block_max = 0.0;
};

inline DenseBlockResidues dense_block_residues(const WeightSet& w, std::size_t i, const ShiftInvariantSet& set, long max_degree) {
  const auto t = DenseTruncation::build(w, DomainKind::ambient, std::nullopt, max_degree);
  const auto n = t.ambient_size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t q = 0; q < t.points().size(); ++q)
    if (set.contains(t.points()[q])) p(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q)) = 1.0;
  const Eigen::MatrixXd z = t.shift(i).real();
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd pc = one - p;
  const Eigen::MatrixXd a = p * z * p, b = p * z * pc, c = pc * z * p, d = pc * z * pc;
  const Eigen::MatrixXd full = z.transpose() * z - z * z.transpose();
  const Eigen::MatrixXd k11 = p * full * p;
  const Eigen::MatrixXd k22 = pc * full * pc;
  const Eigen::MatrixXd e11 = a.transpose() * a - a * a.transpose() - b * b.transpose();
  const Eigen::MatrixXd e22 = d.transpose() * d - d * d.transpose() + b.transpose() * b;
  DenseBlockResidues r;
  for (std::size_t x = 0; x < t.points().size(); ++x)
    for (std::size_t y = 0; y < t.points().size(); ++y) {
      if (t.points()[x].degree() > max_degree - 1 || t.points()[y].degree() > max_degree - 1) continue;
      const auto xi = static_cast<Eigen::Index>(x), yi = static_cast<Eigen::Index>(y);
      r.residue_sub = std::max(r.residue_sub, std::abs(k11(xi, yi) - e11(xi, yi)));
      r.residue_quot = std::max(r.residue_quot, std::abs(k22(xi, yi) - e22(xi, yi)));
    }
  r.c_block_max = c.cwiseAbs().maxCoeff();
  return r;
}

}  // namespace essnorm
