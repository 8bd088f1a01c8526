#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "essnorm/lattice.hpp"
#include "essnorm/multi_index.hpp"
#include "essnorm/schatten.hpp"
#include "essnorm/shiftops.hpp"
#include "essnorm/submodule.hpp"
#include "essnorm/weights.hpp"

namespace essnorm {

enum class Mechanism { ambient_restriction, edge_operator, induction, finite_dim_defect, cone_tensor };

inline std::string_view to_string(Mechanism t) {
  switch (t) {
    case Mechanism::ambient_restriction: return "ambient-restriction";
    case Mechanism::edge_operator: return "edge-operator";
    case Mechanism::induction: return "induction(m-1)";
    case Mechanism::finite_dim_defect: return "finite-dim-defect";
    case Mechanism::cone_tensor: return "cone-tensor";
  }
  return "unknown";
}

/// One node of a decomposition.  Coordinates of the node are the root axes
/// listed in `free`; the remaining root axes are pinned by `fixed`.
///
/// Kinds of node:
///  - submodule: `submodule` set, a piece of S written over the free axes
///    (the root, a leveled child, or an induction slice);
///  - tensor: cone B(corner) (x) fiber, the structural leaves;
///  - split: the interior (coordinate `split_axis` > corner) or the face
///    (= corner) of a tensor block along one axis.
struct Block {
  std::optional<Mechanism> tag;
  std::string provenance;
  std::vector<AxisLevel> fixed;
  std::vector<std::size_t> free;
  std::optional<VectorSubmodule> submodule;
  MultiIndex corner;
  std::optional<std::size_t> split_axis;
  bool face = false;
  CMatrix fiber;
  std::vector<Block> children;

  bool is_tensor() const noexcept { return tag == Mechanism::cone_tensor; }
  bool is_split() const noexcept { return split_axis.has_value(); }
  bool is_leaf() const noexcept { return children.empty(); }
  std::size_t dimension() const noexcept { return free.size(); }

  /// Root point -> free coordinates; false off the pinned slice.
  bool project(const MultiIndex& root, MultiIndex& out) const {
    for (const auto& f : fixed)
      if (root[f.axis] != f.level) return false;
    out = MultiIndex(free.size());
    for (std::size_t t = 0; t < free.size(); ++t) out[t] = root[free[t]];
    return true;
  }

  /// Lattice membership of a point in the node's own coordinates (cone and
  /// split nodes only).
  bool contains_local(const MultiIndex& b) const {
    if (!corner.divides(b)) return false;
    if (split_axis) return face ? b[*split_axis] == corner[*split_axis] : b[*split_axis] > corner[*split_axis];
    return true;
  }

  bool contains_root(const MultiIndex& root) const {
    MultiIndex b;
    if (!project(root, b)) return false;
    if (submodule) return submodule->fiber_dim(b) > 0;
    return contains_local(b);
  }

  std::string describe() const {
    std::ostringstream os;
    auto axes = [&] {
      os << "{";
      for (std::size_t t = 0; t < free.size(); ++t) os << (t ? "," : "") << free[t] + 1;
      os << "}";
    };
    if (submodule) {
      os << "submodule over axes ";
      axes();
      os << ", " << submodule->generators().size() << " generators";
    } else {
      os << "cone " << corner << " over axes ";
      axes();
      if (split_axis) os << (face ? ", face " : ", interior ") << "along axis " << free[*split_axis] + 1;
      os << ", fiber dim " << fiber.cols();
    }
    if (!fixed.empty()) {
      os << ", slice";
      for (const auto& f : fixed) os << " x" << f.axis + 1 << "=" << f.level;
    }
    return os.str();
  }
};

struct BlockTree {
  VectorSubmodule root_submodule;
  std::size_t target_axis = 0;
  std::optional<Block> root;

  bool empty() const noexcept { return !root.has_value(); }

  /// Mechanism leaves: the per-axis interiors and faces.
  std::vector<const Block*> leaves() const {
    std::vector<const Block*> out;
    visit([&](const Block& b, std::size_t) {
      if (b.is_leaf()) out.push_back(&b);
    });
    return out;
  }

  /// Tensor blocks; these partition S.
  std::vector<const Block*> structural_leaves() const {
    std::vector<const Block*> out;
    visit([&](const Block& b, std::size_t) {
      if (b.is_tensor()) out.push_back(&b);
    });
    return out;
  }

  std::size_t depth() const {
    std::size_t d = 0;
    visit([&](const Block&, std::size_t level) { d = std::max(d, level); });
    return d;
  }

  template <class F>
  void visit(F&& f) const {
    if (root) visit_rec(*root, 0, f);
  }

private:
  template <class F>
  static void visit_rec(const Block& b, std::size_t level, F& f) {
    f(b, level);
    for (const auto& c : b.children) visit_rec(c, level + 1, f);
  }
};

/// Two-variable corner reduction: the cone over the corner of B and the
/// finite defect B(corner) \ B.
struct CornerReduction {
  ShiftInvariantSet cone;
  std::vector<MultiIndex> defect;
  Mechanism defect_tag = Mechanism::finite_dim_defect;
};

inline CornerReduction corner_reduce(const ShiftInvariantSet& b) {
  if (b.dimension() != 2)
    throw std::invalid_argument("corner_reduce handles m = 2 only; use reduce_axis or full_reduction for m = " + std::to_string(b.dimension()));
  const auto diff = cofinite_difference(b);
  if (!diff.finite) throw std::logic_error("two-variable defect is infinite");
  return {ShiftInvariantSet::cone(diff.corner), diff.points, Mechanism::finite_dim_defect};
}

namespace detail {

inline Block make_split(const Block& tensor, std::size_t axis, bool face) {
  Block s;
  s.fixed = tensor.fixed;
  s.free = tensor.free;
  s.corner = tensor.corner;
  s.fiber = tensor.fiber;
  s.split_axis = axis;
  s.face = face;
  if (face && tensor.corner[axis] > 0) {
    s.tag = Mechanism::edge_operator;
    s.provenance = "face along axis " + std::to_string(tensor.free[axis] + 1) + ", edge Gram";
  } else {
    s.tag = Mechanism::ambient_restriction;
    s.provenance = std::string(face ? "face" : "interior") + " along axis " + std::to_string(tensor.free[axis] + 1) + ", agrees with the ambient module";
  }
  return s;
}

inline Block make_tensor(std::vector<AxisLevel> fixed, std::vector<std::size_t> free, MultiIndex corner, CMatrix fiber, std::string provenance) {
  Block t;
  t.tag = Mechanism::cone_tensor;
  t.provenance = std::move(provenance);
  t.fixed = std::move(fixed);
  t.free = std::move(free);
  t.corner = std::move(corner);
  t.fiber = std::move(fiber);
  for (std::size_t a = 0; a < t.free.size(); ++a) {
    t.children.push_back(make_split(t, a, false));
    t.children.push_back(make_split(t, a, true));
  }
  return t;
}

inline VectorSubmodule slice_submodule(const VectorSubmodule& s, std::size_t axis, int level) {
  std::vector<Generator> gens;
  for (const auto& g : s.generators())
    if (g.alpha[axis] <= level) gens.push_back({g.alpha.without(axis), g.x});
  return {s.dimension() - 1, s.multiplicity(), std::move(gens), s.rank_cutoff()};
}

inline Block submodule_node(const VectorSubmodule& s, std::vector<AxisLevel> fixed, std::vector<std::size_t> free, std::string provenance) {
  Block b;
  b.provenance = std::move(provenance);
  b.fixed = std::move(fixed);
  b.free = std::move(free);
  b.submodule = s;
  b.corner = MultiIndex(b.free.size());
  return b;
}

/// Children of a submodule node when leveling local axis j.
inline std::vector<Block> level_children(const Block& node, std::size_t j) {
  const VectorSubmodule& s = *node.submodule;
  const int top = s.generator_box()[j];
  std::vector<Generator> raised;
  for (const auto& g : s.generators()) {
    MultiIndex a = g.alpha;
    a[j] = top;
    raised.push_back({a, g.x});
  }
  std::vector<Block> out;
  out.push_back(submodule_node({s.dimension(), s.multiplicity(), std::move(raised), s.rank_cutoff()}, node.fixed, node.free,
                               "leveled along axis " + std::to_string(node.free[j] + 1) + " at " + std::to_string(top)));
  for (int gamma = 0; gamma < top; ++gamma) {
    VectorSubmodule sl = slice_submodule(s, j, gamma);
    if (sl.empty()) continue;
    auto fixed = node.fixed;
    fixed.push_back({node.free[j], gamma});
    std::sort(fixed.begin(), fixed.end(), [](const AxisLevel& x, const AxisLevel& y) { return x.axis < y.axis; });
    auto free = node.free;
    free.erase(free.begin() + static_cast<std::ptrdiff_t>(j));
    Block c = submodule_node(sl, std::move(fixed), std::move(free),
                             "slice x" + std::to_string(node.free[j] + 1) + "=" + std::to_string(gamma) + " below the leveled generators");
    c.tag = Mechanism::induction;
    out.push_back(std::move(c));
  }
  return out;
}

inline void reduce_rec(Block& node, std::size_t target_root) {
  const VectorSubmodule& s = *node.submodule;
  if (s.empty()) return;
  const std::size_t m = s.dimension();
  std::size_t target = m;
  for (std::size_t t = 0; t < m; ++t)
    if (node.free[t] == target_root) target = t;
  if (target == m) throw std::logic_error("target axis was sliced away");
  // The first non-target axis whose generators are not yet level.
  std::optional<std::size_t> axis;
  for (std::size_t t = 0; t < m && !axis; ++t) {
    if (t == target) continue;
    for (const auto& g : s.generators())
      if (g.alpha[t] != s.generator_box()[t]) {
        axis = t;
        break;
      }
  }
  if (axis) {
    node.children = level_children(node, *axis);
    for (auto& c : node.children) reduce_rec(c, target_root);
    return;
  }
  // Every generator agrees with the box off the target axis: a filtration
  // along the target yields cone (x) jump-space blocks.
  const Filtration f = filtration_along(s, s.generator_box(), target);
  for (std::size_t r = 0; r < f.breakpoints.size(); ++r) {
    MultiIndex c = s.generator_box();
    c[target] = f.breakpoints[r];
    node.children.push_back(make_tensor(node.fixed, node.free, c, f.jump_spaces[r],
                                        "filtration along axis " + std::to_string(target_root + 1) + ", breakpoint " + std::to_string(f.breakpoints[r])));
  }
}

}  // namespace detail

/// Interior and face of the cone B(a) along `axis`.  The face is an edge
/// block when a_axis > 0 and otherwise a slice of the ambient module.
inline std::pair<Block, Block> split_axis(const ShiftInvariantSet& cone, std::size_t axis) {
  if (!cone.is_cone()) throw std::invalid_argument("split_axis needs a single-generator cone");
  if (axis >= cone.dimension()) throw std::invalid_argument("axis out of range");
  std::vector<std::size_t> free(cone.dimension());
  for (std::size_t t = 0; t < free.size(); ++t) free[t] = t;
  Block t = detail::make_tensor({}, free, cone.generators().front(), CMatrix::Ones(1, 1), "cone");
  return {detail::make_split(t, axis, false), detail::make_split(t, axis, true)};
}

/// One leveling step along `axis`: child 0 raises every generator to the
/// largest entry on the axis; the remaining children are the nonempty slices
/// below that level, each an (m-1)-variable submodule.
inline BlockTree reduce_axis(const VectorSubmodule& s, std::size_t axis) {
  if (axis >= s.dimension()) throw std::invalid_argument("axis out of range");
  if (s.empty()) throw std::invalid_argument("reduce_axis needs a nonempty submodule");
  BlockTree tree;
  tree.root_submodule = s;
  tree.target_axis = axis;
  std::vector<std::size_t> free(s.dimension());
  for (std::size_t t = 0; t < free.size(); ++t) free[t] = t;
  tree.root = detail::submodule_node(s, {}, free, "root");
  tree.root->children = detail::level_children(*tree.root, axis);
  return tree;
}

/// Repeated leveling of every axis except `target` (default: the last),
/// recursing into slices, until each piece is a cone (x) jump space.
inline BlockTree full_reduction(const VectorSubmodule& s, std::optional<std::size_t> target = std::nullopt) {
  BlockTree tree;
  tree.root_submodule = s;
  if (s.dimension() == 0) throw std::invalid_argument("submodule has no variables");
  tree.target_axis = target.value_or(s.dimension() - 1);
  if (tree.target_axis >= s.dimension()) throw std::invalid_argument("target axis out of range");
  if (s.empty()) return tree;
  std::vector<std::size_t> free(s.dimension());
  for (std::size_t t = 0; t < free.size(); ++t) free[t] = t;
  tree.root = detail::submodule_node(s, {}, free, "root");
  detail::reduce_rec(*tree.root, tree.target_axis);
  return tree;
}

/// Check that the tensor blocks of `tree` split the fiber of S at each of
/// the given points into mutually orthogonal pieces spanning H_beta.
struct PartitionCheck {
  std::size_t points = 0;
  std::size_t failures = 0;
  std::optional<MultiIndex> first_failure;
  double worst = 0.0;
};

inline PartitionCheck check_partition(const BlockTree& tree, const std::vector<MultiIndex>& points, double tol = 1e-10) {
  PartitionCheck r;
  const auto leaves = tree.structural_leaves();
  const auto k = static_cast<Eigen::Index>(tree.root_submodule.multiplicity());
  for (const auto& p : points) {
    ++r.points;
    std::vector<const CMatrix*> parts;
    Eigen::Index cols = 0;
    for (const Block* b : leaves)
      if (b->contains_root(p)) {
        parts.push_back(&b->fiber);
        cols += b->fiber.cols();
      }
    CMatrix q(k, cols);
    Eigen::Index at = 0;
    for (const CMatrix* m : parts) {
      q.middleCols(at, m->cols()) = *m;
      at += m->cols();
    }
    const auto h = tree.root_submodule.fiber(p);
    double err = static_cast<Eigen::Index>(h->dim()) == cols ? 0.0 : 1.0;
    if (cols) {
      err = std::max(err, (q.adjoint() * q - CMatrix::Identity(cols, cols)).cwiseAbs().maxCoeff());
      err = std::max(err, (q - h->basis * (h->basis.adjoint() * q)).cwiseAbs().maxCoeff());
    }
    r.worst = std::max(r.worst, err);
    if (err > tol) {
      if (!r.failures) r.first_failure = p;
      ++r.failures;
    }
  }
  return r;
}

/// Domain of a tensor or split block inside M (x) C^k, in root coordinates.
inline Domain block_domain(const Block& b, std::size_t root_m, std::size_t k) {
  if (b.submodule) throw std::invalid_argument("block_domain needs a cone block");
  Block copy = b;
  copy.children.clear();
  return Domain::ambient(root_m, k).restricted([copy](const MultiIndex& p) {
    MultiIndex local;
    return copy.project(p, local) && copy.contains_local(local);
  }, b.fiber);
}

/// Self-commutator of the shift along the target axis compressed to a
/// tensor block.  The blocks reduce that shift, so these operators add up to
/// [Y*, Y] on S.
inline LatticeOperator leaf_self_commutator(const WeightSet& w, const BlockTree& tree, const Block& leaf) {
  return self_commutator(shift_op(w, tree.target_axis, block_domain(leaf, tree.root_submodule.dimension(), tree.root_submodule.multiplicity())));
}

using LeafTest = OperatorVerdict;

struct LeafAudit {
  std::string path;
  std::string description;
  std::optional<Mechanism> tag;
  std::string provenance;
  std::vector<LeafTest> tests;
  Verdict verdict = Verdict::converged;
};

struct AuditReport {
  std::vector<LeafAudit> leaves;
  /// [Y_i^*, Y_j] on S itself.
  std::vector<LeafTest> direct;
  Verdict aggregate = Verdict::converged;
};

namespace detail {

inline std::vector<LeafTest> audit_block(const WeightSet& root_w, const Block& b, std::optional<double> p, const VerdictOptions& o) {
  const WeightSet w = root_w.restrict_to_slice(b.fixed);
  const std::size_t m = w.dimension();
  std::vector<LeafTest> out;
  auto judge = [&](const LatticeOperator& op) { out.push_back({op.label(), verdict(op, p, o)}); };
  Block shape = b;
  shape.children.clear();
  const Domain::Membership member = [shape](const MultiIndex& x) { return shape.contains_local(x); };
  if (b.is_tensor()) {
    const Domain d = Domain::submodule(VectorSubmodule::scalar(ShiftInvariantSet::cone(b.corner)));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) judge(commutator(w, i, j, d));
  } else if (b.tag == Mechanism::edge_operator) {
    judge(edge_gram(w, *b.split_axis, Domain::ambient(m).restricted(member)));
  } else {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const auto c = commutator(w, i, j, Domain::ambient(m));
        judge(restrict_to(c, member, c.label() + "|block"));
      }
  }
  return out;
}

}  // namespace detail

/// Numeric audit of a decomposition: every tensor block and every split leaf
/// is tested with the operator its mechanism names, in the restricted weight
/// set of its slice; the aggregate also includes all [Y_i^*, Y_j] on S.
inline AuditReport audit(const WeightSet& w, const BlockTree& tree, std::optional<double> p, const VerdictOptions& o = {}) {
  AuditReport rep;
  if (tree.empty()) return rep;
  const VectorSubmodule& s = tree.root_submodule;
  if (w.dimension() != s.dimension()) throw std::invalid_argument("weights and submodule differ in dimension");
  const Domain d = Domain::submodule(s);
  for (std::size_t i = 0; i < s.dimension(); ++i)
    for (std::size_t j = 0; j < s.dimension(); ++j) {
      const auto op = commutator(w, i, j, d);
      rep.direct.push_back({"[Y" + std::to_string(i + 1) + "*,Y" + std::to_string(j + 1) + "]", verdict(op, p, o)});
      rep.aggregate = worst(rep.aggregate, rep.direct.back().result.verdict);
    }
  std::vector<std::pair<const Block*, std::string>> todo;
  auto walk = [&](auto&& self, const Block& b, const std::string& path) -> void {
    if (b.is_tensor() || b.is_split()) todo.emplace_back(&b, path);
    for (std::size_t c = 0; c < b.children.size(); ++c) self(self, b.children[c], path + "." + std::to_string(c));
  };
  walk(walk, *tree.root, "0");
  for (const auto& [b, path] : todo) {
    LeafAudit la;
    la.path = path;
    la.description = b->describe();
    la.tag = b->tag;
    la.provenance = b->provenance;
    la.tests = detail::audit_block(w, *b, p, o);
    for (const auto& t : la.tests) la.verdict = worst(la.verdict, t.result.verdict);
    rep.aggregate = worst(rep.aggregate, la.verdict);
    rep.leaves.push_back(std::move(la));
  }
  return rep;
}

}  // namespace essnorm
