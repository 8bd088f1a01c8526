#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "essnorm/lattice.hpp"
#include "essnorm/multi_index.hpp"
#include "essnorm/submodule.hpp"
#include "essnorm/weights.hpp"

namespace essnorm {

enum class DomainKind { ambient, submodule, quotient };

inline std::string_view to_string(DomainKind d) {
  switch (d) {
    case DomainKind::ambient: return "ambient";
    case DomainKind::submodule: return "submodule";
    case DomainKind::quotient: return "quotient";
  }
  return "unknown";
}

/// A closed subspace of M (x) C^k of the form sum_beta e_beta (x) D(beta):
/// the ambient module, a monomial submodule S (D = H_beta), its orthogonal
/// complement (D = H_beta^perp), or any of these cut down to a lattice
/// subset, optionally with a fixed fiber (the blocks of a decomposition).
class Domain {
public:
  using Membership = std::function<bool(const MultiIndex&)>;

  static Domain ambient(std::size_t m, std::size_t k = 1) {
    Domain d;
    d.kind_ = DomainKind::ambient;
    d.m_ = m;
    d.k_ = k;
    d.identity_ = std::make_shared<FiberBasis>(FiberBasis{CMatrix::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))});
    d.empty_ = std::make_shared<FiberBasis>(FiberBasis{CMatrix(static_cast<Eigen::Index>(k), 0)});
    return d;
  }

  static Domain submodule(const VectorSubmodule& s) { return of(DomainKind::submodule, s); }
  static Domain quotient(const VectorSubmodule& s) { return of(DomainKind::quotient, s); }

  static Domain of(DomainKind kind, const VectorSubmodule& s) {
    if (kind == DomainKind::ambient) return ambient(s.dimension(), s.multiplicity());
    Domain d = ambient(s.dimension(), s.multiplicity());
    d.kind_ = kind;
    d.sub_ = std::make_shared<const VectorSubmodule>(s);
    if (s.is_scalar()) d.scalar_set_ = std::make_shared<const ShiftInvariantSet>(s.support());
    return d;
  }

  /// This domain cut down to the lattice points accepted by `member`.  With
  /// `fiber` set, the fiber on accepted points is that fixed subspace
  /// instead (it must lie inside the original fiber there).
  Domain restricted(Membership member, std::optional<CMatrix> fiber = std::nullopt) const {
    Domain d = *this;
    if (d.member_) {
      auto outer = d.member_;
      d.member_ = [outer, member](const MultiIndex& b) { return outer(b) && member(b); };
    } else {
      d.member_ = std::move(member);
    }
    if (fiber) {
      if (fiber->rows() != static_cast<Eigen::Index>(k_)) throw std::invalid_argument("fixed fiber has wrong length");
      d.fixed_ = std::make_shared<FiberBasis>(FiberBasis{*fiber});
    }
    return d;
  }

  DomainKind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return m_; }
  std::size_t multiplicity() const noexcept { return k_; }
  bool scalar() const noexcept { return k_ == 1; }
  const VectorSubmodule* submodule_ptr() const noexcept { return sub_.get(); }

  /// Orthonormal basis of D(beta) (k x dim, possibly k x 0).
  std::shared_ptr<const FiberBasis> basis(const MultiIndex& b) const {
    if (member_ && !member_(b)) return empty_;
    if (fixed_) return fixed_;
    switch (kind_) {
      case DomainKind::ambient: return identity_;
      case DomainKind::submodule: return sub_->fiber(b);
      case DomainKind::quotient: return sub_->quotient_fiber(b);
    }
    return empty_;
  }

  std::size_t fiber_dim(const MultiIndex& b) const { return basis(b)->dim(); }

  /// Scalar domains only: is e_beta in the domain.
  bool contains(const MultiIndex& b) const {
    if (member_ && !member_(b)) return false;
    if (fixed_) return fixed_->dim() > 0;
    switch (kind_) {
      case DomainKind::ambient: return true;
      case DomainKind::submodule: return scalar_set_ ? scalar_set_->contains(b) : sub_->fiber_dim(b) > 0;
      case DomainKind::quotient: return scalar_set_ ? !scalar_set_->contains(b) : sub_->fiber_dim(b) < k_;
    }
    return false;
  }

private:
  DomainKind kind_ = DomainKind::ambient;
  std::size_t m_ = 0;
  std::size_t k_ = 1;
  std::shared_ptr<const VectorSubmodule> sub_;
  std::shared_ptr<const ShiftInvariantSet> scalar_set_;
  Membership member_;
  std::shared_ptr<const FiberBasis> fixed_;
  std::shared_ptr<const FiberBasis> identity_;
  std::shared_ptr<const FiberBasis> empty_;
};

/// A displacement-homogeneous operator: e_beta (x) D(beta) is mapped into
/// e_{beta+delta} (x) D(beta+delta) by a block written in the orthonormal
/// fiber bases of the domain (normalized basis e_alpha = z^alpha/lambda_alpha).
/// Blocks that leave the lattice or the domain are zero and never stored.
class LatticeOperator {
public:
  using BlockFn = std::function<CMatrix(const MultiIndex&)>;
  using ScalarFn = std::function<double(const MultiIndex&)>;

  LatticeOperator(std::vector<int> delta, Domain domain, BlockFn block, ScalarFn scalar, std::string label)
      : delta_(std::move(delta)), domain_(std::move(domain)), block_(std::move(block)), scalar_(std::move(scalar)), label_(std::move(label)) {
    if (delta_.size() != domain_.dimension()) throw std::invalid_argument("displacement has wrong dimension");
  }

  const std::vector<int>& displacement() const noexcept { return delta_; }
  const Domain& domain() const noexcept { return domain_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t dimension() const noexcept { return domain_.dimension(); }
  /// True when every block is at most 1x1 and real (k = 1).
  bool is_scalar() const noexcept { return static_cast<bool>(scalar_); }

  bool target(const MultiIndex& b, MultiIndex& out) const { return b.shifted(delta_, out); }

  /// Block D(beta) -> D(beta + delta); 0 rows when beta + delta leaves A_m.
  CMatrix coefficient(const MultiIndex& b) const {
    if (b.size() != dimension()) throw std::invalid_argument("index " + b.str() + " has wrong dimension");
    return block_(b);
  }

  /// Scalar operators only: the single entry (0 off-domain).
  double scalar_coefficient(const MultiIndex& b) const { return scalar_(b); }

private:
  std::vector<int> delta_;
  Domain domain_;
  BlockFn block_;
  ScalarFn scalar_;
  std::string label_;
};

namespace detail {

inline CMatrix empty_block(Eigen::Index rows, Eigen::Index cols) { return CMatrix::Zero(rows, cols); }

inline void check_axis(std::size_t i, std::size_t m) {
  if (i >= m) throw std::invalid_argument("axis " + std::to_string(i + 1) + " out of range for m = " + std::to_string(m));
}

}  // namespace detail

/// Compression of Z_i (x) I to the domain: the ambient shift, the restriction
/// Y_i to a submodule (compression = restriction by invariance), or the
/// quotient compression N_i.  Block at beta: w_i(beta) B_{beta+e_i}^* B_beta.
inline LatticeOperator shift_op(const WeightSet& w, std::size_t i, const Domain& d) {
  detail::check_axis(i, d.dimension());
  if (w.dimension() != d.dimension()) throw std::invalid_argument("weight set and domain differ in dimension");
  std::vector<int> delta(d.dimension(), 0);
  delta[i] = 1;
  auto block = [w, i, d](const MultiIndex& b) -> CMatrix {
    const auto src = d.basis(b);
    const auto dst = d.basis(b.plus_unit(i));
    if (src->dim() == 0 || dst->dim() == 0) return detail::empty_block(static_cast<Eigen::Index>(dst->dim()), static_cast<Eigen::Index>(src->dim()));
    return w.ratio(i, b) * (dst->basis.adjoint() * src->basis);
  };
  LatticeOperator::ScalarFn scalar;
  if (d.scalar())
    scalar = [w, i, d](const MultiIndex& b) { return d.contains(b) && d.contains(b.plus_unit(i)) ? w.ratio(i, b) : 0.0; };
  return {std::move(delta), d, std::move(block), std::move(scalar), "Z" + std::to_string(i + 1)};
}

/// Block of op^* at beta: the conjugate transpose of op's block at beta - delta.
inline CMatrix adjoint_coefficient(const LatticeOperator& op, const MultiIndex& b) {
  std::vector<int> back(op.displacement());
  for (auto& v : back) v = -v;
  MultiIndex src;
  if (!b.shifted(back, src)) return detail::empty_block(0, static_cast<Eigen::Index>(op.domain().fiber_dim(b)));
  return op.coefficient(src).adjoint();
}

inline LatticeOperator adjoint(const LatticeOperator& op) {
  std::vector<int> back(op.displacement());
  for (auto& v : back) v = -v;
  auto block = [op](const MultiIndex& b) { return adjoint_coefficient(op, b); };
  LatticeOperator::ScalarFn scalar;
  if (op.is_scalar())
    scalar = [op, back](const MultiIndex& b) {
      MultiIndex src;
      return b.shifted(back, src) ? op.scalar_coefficient(src) : 0.0;
    };
  return {back, op.domain(), std::move(block), std::move(scalar), op.label() + "*"};
}

/// [T^*, T] for T of displacement e_i: block at beta is
/// C(beta)^* C(beta) - C(beta - e_i) C(beta - e_i)^*.
inline LatticeOperator self_commutator(const LatticeOperator& op) {
  const auto& delta = op.displacement();
  std::size_t axis = delta.size();
  int ones = 0;
  for (std::size_t t = 0; t < delta.size(); ++t) {
    if (delta[t] == 1) {
      axis = t;
      ++ones;
    } else if (delta[t] != 0) {
      ones = 2;
    }
  }
  if (ones != 1) throw std::invalid_argument("self_commutator needs a unit displacement");
  const Domain& d = op.domain();
  auto block = [op, axis, d](const MultiIndex& b) -> CMatrix {
    const auto dim = static_cast<Eigen::Index>(d.fiber_dim(b));
    CMatrix out = CMatrix::Zero(dim, dim);
    if (dim == 0) return out;
    const CMatrix up = op.coefficient(b);
    if (up.rows()) out += up.adjoint() * up;
    if (b[axis] > 0) {
      const CMatrix in = op.coefficient(b.minus_unit(axis));
      if (in.cols()) out -= in * in.adjoint();
    }
    return out;
  };
  LatticeOperator::ScalarFn scalar;
  if (op.is_scalar())
    scalar = [op, axis](const MultiIndex& b) {
      const double up = op.scalar_coefficient(b);
      const double in = b[axis] > 0 ? op.scalar_coefficient(b.minus_unit(axis)) : 0.0;
      return up * up - in * in;
    };
  return {std::vector<int>(delta.size(), 0), d, std::move(block), std::move(scalar), "[" + op.label() + "*," + op.label() + "]"};
}

/// [T_i^*, T_j] with T the compressions of Z_i, Z_j to the domain; maps
/// e_alpha to e_{alpha - e_i + e_j}.  Block at alpha:
/// C_i(alpha - e_i + e_j)^* C_j(alpha) - C_j(alpha - e_i) C_i(alpha - e_i)^*.
inline LatticeOperator commutator(const WeightSet& w, std::size_t i, std::size_t j, const Domain& d) {
  if (i == j) return self_commutator(shift_op(w, i, d));
  const LatticeOperator zi = shift_op(w, i, d);
  const LatticeOperator zj = shift_op(w, j, d);
  std::vector<int> delta(d.dimension(), 0);
  delta[i] = -1;
  delta[j] = 1;
  auto block = [zi, zj, i, j, d](const MultiIndex& a) -> CMatrix {
    const auto cols = static_cast<Eigen::Index>(d.fiber_dim(a));
    if (a[i] == 0) return detail::empty_block(0, cols);
    const MultiIndex down = a.minus_unit(i);
    const MultiIndex tgt = down.plus_unit(j);
    const auto rows = static_cast<Eigen::Index>(d.fiber_dim(tgt));
    CMatrix out = CMatrix::Zero(rows, cols);
    if (rows == 0 || cols == 0) return out;
    const CMatrix cj = zj.coefficient(a);    // D(a) -> D(a+e_j)
    const CMatrix ci = zi.coefficient(tgt);  // D(tgt) -> D(a+e_j)
    if (cj.rows() && ci.rows()) out += ci.adjoint() * cj;
    const CMatrix ci_down = zi.coefficient(down);  // D(down) -> D(a)
    const CMatrix cj_down = zj.coefficient(down);  // D(down) -> D(tgt)
    if (ci_down.cols() && cj_down.rows()) out -= cj_down * ci_down.adjoint();
    return out;
  };
  LatticeOperator::ScalarFn scalar;
  if (d.scalar())
    scalar = [zi, zj, i, j](const MultiIndex& a) {
      if (a[i] == 0) return 0.0;
      const MultiIndex down = a.minus_unit(i);
      const MultiIndex tgt = down.plus_unit(j);
      return zj.scalar_coefficient(a) * zi.scalar_coefficient(tgt) - zj.scalar_coefficient(down) * zi.scalar_coefficient(down);
    };
  return {std::move(delta), d, std::move(block), std::move(scalar), "[Z" + std::to_string(i + 1) + "*,Z" + std::to_string(j + 1) + "]"};
}

/// Gram X^* X of the edge map X: D -> M (x) C^k given by Z_i without
/// compressing the target; diagonal with entry w_i(beta)^2 on D(beta).
inline LatticeOperator edge_gram(const WeightSet& w, std::size_t i, const Domain& d) {
  detail::check_axis(i, d.dimension());
  auto block = [w, i, d](const MultiIndex& b) -> CMatrix {
    const auto dim = static_cast<Eigen::Index>(d.fiber_dim(b));
    const double r = dim ? w.ratio(i, b) : 0.0;
    return (r * r) * CMatrix::Identity(dim, dim);
  };
  LatticeOperator::ScalarFn scalar;
  if (d.scalar())
    scalar = [w, i, d](const MultiIndex& b) {
      if (!d.contains(b)) return 0.0;
      const double r = w.ratio(i, b);
      return r * r;
    };
  return {std::vector<int>(d.dimension(), 0), d, std::move(block), std::move(scalar), "X" + std::to_string(i + 1) + "*X" + std::to_string(i + 1)};
}

/// op restricted to a lattice subset: blocks whose source or target falls
/// outside `member` are dropped (no compression of the factors).
inline LatticeOperator restrict_to(const LatticeOperator& op, Domain::Membership member, std::string label) {
  auto keep = [op, member](const MultiIndex& b) {
    MultiIndex t;
    return member(b) && op.target(b, t) && member(t);
  };
  auto block = [op, keep](const MultiIndex& b) -> CMatrix { return keep(b) ? op.coefficient(b) : CMatrix(0, 0); };
  LatticeOperator::ScalarFn scalar;
  if (op.is_scalar())
    scalar = [op, keep](const MultiIndex& b) { return keep(b) ? op.scalar_coefficient(b) : 0.0; };
  return {op.displacement(), op.domain().restricted(member), std::move(block), std::move(scalar), std::move(label)};
}

/// Membership in the multi-slice {alpha : alpha_{axis} = level for each entry}.
inline Domain::Membership slice_membership(std::vector<AxisLevel> fixed) {
  return [fixed = std::move(fixed)](const MultiIndex& b) {
    for (const auto& f : fixed)
      if (b[f.axis] != f.level) return false;
    return true;
  };
}

/// Edge Gram of Z_i on the scalar ambient slice Sigma^k_i (or a multi-slice).
inline LatticeOperator edge_gram(const WeightSet& w, std::size_t i, const std::vector<AxisLevel>& slice) {
  return edge_gram(w, i, Domain::ambient(w.dimension()).restricted(slice_membership(slice)));
}

/// Finitely supported vector: coefficients in the domain's fiber bases.
using LatticeVector = std::map<MultiIndex, CVector>;

inline LatticeVector apply(const LatticeOperator& op, const LatticeVector& v) {
  LatticeVector out;
  MultiIndex tgt;
  for (const auto& [b, c] : v) {
    if (!op.target(b, tgt)) continue;
    const CMatrix blk = op.coefficient(b);
    if (blk.rows() == 0 || blk.cols() == 0) continue;
    if (blk.cols() != c.size()) throw std::invalid_argument("vector coefficient at " + b.str() + " does not match the fiber");
    auto [it, fresh] = out.try_emplace(tgt, CVector::Zero(blk.rows()));
    it->second += blk * c;
  }
  return out;
}

/// Dense truncation of the scalar Z_i split along M = N + N^perp with
/// N = M_Lambda(B), and the 2x2 block-commutator residues.
struct BlockSplit {
  Eigen::MatrixXd a, b, c, d;
  std::vector<MultiIndex> sub_basis, quot_basis;
  /// max |[T^*,T]_11 - ([A^*,A] - B B^*)| on the degree <= N-1 sub-box.
  double residue_sub = 0.0;
  /// max |[T^*,T]_22 - ([D^*,D] + B^* B)| on the degree <= N-1 sub-box.
  double residue_quot = 0.0;
  double c_block_max = 0.0;
};

inline BlockSplit block_split(const WeightSet& w, std::size_t i, const ShiftInvariantSet& set, long n_max) {
  if (n_max < 2) throw std::invalid_argument("block_split needs truncation degree N >= 2");
  const std::size_t m = w.dimension();
  detail::check_axis(i, m);
  if (set.dimension() != m) throw std::invalid_argument("set and weights differ in dimension");
  const LatticeOperator z = shift_op(w, i, Domain::ambient(m));
  BlockSplit r;
  std::map<MultiIndex, Eigen::Index> sub_pos, quot_pos;
  for (long n = 0; n <= n_max; ++n)
    for_each_in_shell(m, n, [&](const MultiIndex& a) {
      if (set.contains(a)) {
        sub_pos.emplace(a, static_cast<Eigen::Index>(r.sub_basis.size()));
        r.sub_basis.push_back(a);
      } else {
        quot_pos.emplace(a, static_cast<Eigen::Index>(r.quot_basis.size()));
        r.quot_basis.push_back(a);
      }
    });
  const auto ns = static_cast<Eigen::Index>(r.sub_basis.size());
  const auto nq = static_cast<Eigen::Index>(r.quot_basis.size());
  r.a = Eigen::MatrixXd::Zero(ns, ns);
  r.b = Eigen::MatrixXd::Zero(ns, nq);
  r.c = Eigen::MatrixXd::Zero(nq, ns);
  r.d = Eigen::MatrixXd::Zero(nq, nq);
  auto place = [&](const MultiIndex& src, bool src_sub, Eigen::Index col) {
    const MultiIndex dst = src.plus_unit(i);
    if (dst.degree() > n_max) return;
    const double v = z.scalar_coefficient(src);
    if (set.contains(dst)) (src_sub ? r.a : r.b)(sub_pos.at(dst), col) = v;
    else (src_sub ? r.c : r.d)(quot_pos.at(dst), col) = v;
  };
  for (Eigen::Index c = 0; c < ns; ++c) place(r.sub_basis[static_cast<std::size_t>(c)], true, c);
  for (Eigen::Index c = 0; c < nq; ++c) place(r.quot_basis[static_cast<std::size_t>(c)], false, c);

  // Full truncated T in the ordering (N, N^perp) and its commutator.
  Eigen::MatrixXd t(ns + nq, ns + nq);
  t << r.a, r.b, r.c, r.d;
  const Eigen::MatrixXd k = t.transpose() * t - t * t.transpose();
  const Eigen::MatrixXd k11 = k.topLeftCorner(ns, ns);
  const Eigen::MatrixXd k22 = k.bottomRightCorner(nq, nq);
  const Eigen::MatrixXd e11 = r.a.transpose() * r.a - r.a * r.a.transpose() - r.b * r.b.transpose();
  const Eigen::MatrixXd e22 = r.d.transpose() * r.d - r.d * r.d.transpose() + r.b.transpose() * r.b;
  auto inner = [n_max](const std::vector<MultiIndex>& basis) {
    std::vector<Eigen::Index> idx;
    for (std::size_t t2 = 0; t2 < basis.size(); ++t2)
      if (basis[t2].degree() <= n_max - 1) idx.push_back(static_cast<Eigen::Index>(t2));
    return idx;
  };
  auto residue = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const std::vector<Eigen::Index>& idx) {
    double worst = 0.0;
    for (auto p : idx)
      for (auto q : idx) worst = std::max(worst, std::abs(x(p, q) - y(p, q)));
    return worst;
  };
  r.residue_sub = residue(k11, e11, inner(r.sub_basis));
  r.residue_quot = residue(k22, e22, inner(r.quot_basis));
  r.c_block_max = r.c.size() ? r.c.cwiseAbs().maxCoeff() : 0.0;
  return r;
}

}  // namespace essnorm
