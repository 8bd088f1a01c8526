#include <gtest/gtest.h>

#include <random>

#include "essnorm/oracle.hpp"
#include "essnorm/shiftops.hpp"
#include "random_inputs.hpp"

using namespace essnorm;

namespace {

double coef(const LatticeOperator& op, const MultiIndex& b) {
  const CMatrix c = op.coefficient(b);
  if (c.size() == 0) return 0.0;
  EXPECT_EQ(c.size(), 1);
  EXPECT_EQ(c(0, 0).imag(), 0.0);
  return c(0, 0).real();
}

LatticeVector random_vector(std::mt19937_64& rng, const Domain& d, int terms) {
  LatticeVector v;
  for (int t = 0; t < terms; ++t) {
    const auto b = essnorm::testing::random_point(rng, d.dimension(), 4, 8);
    const auto dim = static_cast<Eigen::Index>(d.fiber_dim(b));
    if (!dim) continue;
    CVector x(dim);
    for (Eigen::Index r = 0; r < dim; ++r) x[r] = Complex(essnorm::testing::uniform(rng, -9, 9) / 8.0, essnorm::testing::uniform(rng, -9, 9) / 8.0);
    v[b] = x;
  }
  return v;
}

double distance(const LatticeVector& a, const LatticeVector& b) {
  double d = 0.0;
  for (const auto& [k, x] : a) d = std::max(d, b.count(k) ? (x - b.at(k)).cwiseAbs().maxCoeff() : x.cwiseAbs().maxCoeff());
  for (const auto& [k, x] : b)
    if (!a.count(k)) d = std::max(d, x.cwiseAbs().maxCoeff());
  return d;
}

}  // namespace

TEST(Shift, ScalarCoefficients) {
  const auto w = WeightSet::drury_arveson(2);
  const auto z = shift_op(w, 0, Domain::ambient(2));
  EXPECT_DOUBLE_EQ(z.scalar_coefficient({0, 0}), 1.0);
  MultiIndex t;
  ASSERT_TRUE(z.target({0, 0}, t));
  EXPECT_EQ(t, (MultiIndex{1, 0}));
  const auto s = VectorSubmodule::scalar(closure(2, {{1, 0}}));
  EXPECT_EQ(coef(shift_op(w, 0, Domain::submodule(s)), {0, 0}), 0.0);
}

TEST(Shift, QuotientCompressionOnSurvivingFiber) {
  const auto w = WeightSet::drury_arveson(2);
  const VectorSubmodule s(2, 2, {{{0, 0}, CVector::Unit(2, 0)}});
  const auto n1 = shift_op(w, 0, Domain::quotient(s));
  for (const MultiIndex b : {MultiIndex{0, 0}, MultiIndex{2, 1}, MultiIndex{3, 5}}) {
    const CMatrix c = n1.coefficient(b);
    ASSERT_EQ(c.rows(), 1);
    ASSERT_EQ(c.cols(), 1);
    EXPECT_NEAR(std::abs(c(0, 0)), w.ratio(0, b), 1e-15);
  }
}

TEST(Adjoint, Coefficients) {
  const auto u = adjoint(shift_op(WeightSet::unweighted(1), 0, Domain::ambient(1)));
  EXPECT_EQ(coef(u, {0}), 0.0);
  const auto a = adjoint(shift_op(WeightSet::drury_arveson(2), 0, Domain::ambient(2)));
  EXPECT_NEAR(coef(a, {1, 1}), std::sqrt(0.5), 1e-15);
}

TEST(SelfCommutator, ClosedForms) {
  const auto w = WeightSet::drury_arveson(2);
  const auto c = commutator(w, 0, 0, Domain::ambient(2));
  EXPECT_NEAR(c.scalar_coefficient({1, 1}), 2.0 / 3.0 - 0.5, 1e-15);
  const auto one = commutator(WeightSet::unweighted(1), 0, 0, Domain::ambient(1));
  EXPECT_DOUBLE_EQ(one.scalar_coefficient({0}), 1.0);
  for (int n = 1; n < 10; ++n) EXPECT_DOUBLE_EQ(one.scalar_coefficient({n}), 0.0);
  const auto y = commutator(w, 0, 0, Domain::submodule(VectorSubmodule::scalar(closure(2, {{1, 0}}))));
  // w_1((1,0))^2 = 2/2; the predecessor (0,0) lies outside the cone.
  EXPECT_NEAR(y.scalar_coefficient({1, 0}), 1.0, 1e-15);
  const auto t = DenseTruncation::build(w, DomainKind::submodule, VectorSubmodule::scalar(closure(2, {{1, 0}})), 6);
  const auto at = static_cast<Eigen::Index>(*t.point_index({1, 0}));
  EXPECT_NEAR(t.to_ambient(t.commutator(0, 0))(at, at).real(), 1.0, 1e-15);
  EXPECT_THROW(self_commutator(commutator(w, 0, 1, Domain::ambient(2))), std::invalid_argument);
}

TEST(SelfCommutator, AmbientDiagonalFormula) {
  for (auto f : essnorm::testing::builtin_families()) {
    const WeightSet w(f, 3);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto c = commutator(w, i, i, Domain::ambient(3));
      for (long n = 0; n <= 8; ++n)
        for_each_in_shell(3, n, [&](const MultiIndex& a) {
          const double up = w.ratio(i, a);
          const double down = a[i] > 0 ? w.ratio(i, a.minus_unit(i)) : 0.0;
          EXPECT_NEAR(c.scalar_coefficient(a), up * up - down * down, 1e-14);
        });
    }
  }
}

TEST(CrossCommutator, ClosedForms) {
  const auto c = commutator(WeightSet::drury_arveson(2), 0, 1, Domain::ambient(2));
  EXPECT_NEAR(c.scalar_coefficient({1, 0}), -0.5, 1e-15);
  const auto u = commutator(WeightSet::unweighted(2), 0, 1, Domain::ambient(2));
  EXPECT_DOUBLE_EQ(u.scalar_coefficient({1, 1}), 0.0);
  const auto t = DenseTruncation::build(WeightSet::drury_arveson(2), DomainKind::ambient, std::nullopt, 4);
  const CMatrix d = t.commutator(0, 1);
  const auto src = static_cast<Eigen::Index>(*t.point_index({1, 0}));
  const auto dst = static_cast<Eigen::Index>(*t.point_index({0, 1}));
  EXPECT_NEAR(d(dst, src).real(), -0.5, 1e-15);
}

TEST(EdgeGram, DiagonalEntries) {
  const auto w = WeightSet::drury_arveson(2);
  const auto g = edge_gram(w, 0, std::vector<AxisLevel>{{0, 0}});
  for (int n = 0; n < 50; ++n) EXPECT_NEAR(g.scalar_coefficient({0, n}), 1.0 / (n + 1), 1e-15);
  EXPECT_EQ(g.scalar_coefficient({1, 3}), 0.0);
  const auto u = edge_gram(WeightSet::unweighted(2), 0, std::vector<AxisLevel>{{0, 0}});
  for (int n = 0; n < 50; ++n) EXPECT_DOUBLE_EQ(u.scalar_coefficient({0, n}), 1.0);
  const auto m3 = edge_gram(WeightSet::drury_arveson(3), 0, std::vector<AxisLevel>{{0, 0}, {1, 0}});
  for (int n = 0; n < 30; ++n) EXPECT_NEAR(m3.scalar_coefficient({0, 0, n}), 1.0 / (n + 1), 1e-15);
}

TEST(BlockSplit, ResiduesVanish) {
  for (auto f : essnorm::testing::builtin_families()) {
    const WeightSet w(f, 2);
    for (const auto& b : {closure(2, {{1, 1}}), closure(2, {{2, 0}, {0, 3}}), closure(2, {{3, 1}, {1, 2}, {0, 5}})})
      for (std::size_t i = 0; i < 2; ++i) {
        const auto r = block_split(w, i, b, 14);
        EXPECT_LE(r.residue_sub, 1e-12);
        EXPECT_LE(r.residue_quot, 1e-12);
        EXPECT_EQ(r.c_block_max, 0.0);
      }
  }
  EXPECT_THROW(block_split(WeightSet::drury_arveson(2), 0, closure(2, {{1, 1}}), 1), std::invalid_argument);
}

TEST(Apply, UnitVector) {
  const auto z = shift_op(WeightSet::drury_arveson(2), 0, Domain::ambient(2));
  const auto out = essnorm::apply(z, {{MultiIndex{0, 0}, CVector::Ones(1)}});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.begin()->first, (MultiIndex{1, 0}));
  EXPECT_NEAR(std::abs(out.begin()->second[0] - 1.0), 0.0, 1e-15);
}

TEST(Apply, MatchesDenseOracle) {
  std::mt19937_64 rng(31);
  const auto w = WeightSet::drury_arveson(2);
  const auto t = DenseTruncation::build(w, DomainKind::ambient, std::nullopt, 10);
  const auto z = shift_op(w, 0, Domain::ambient(2));
  const auto v = random_vector(rng, Domain::ambient(2), 20);
  CVector dense = CVector::Zero(t.size());
  for (const auto& [b, x] : v) dense[static_cast<Eigen::Index>(*t.point_index(b))] = x[0];
  const CVector image = t.shift(0) * dense;
  const auto out = essnorm::apply(z, v);
  for (const auto& [b, x] : out) EXPECT_NEAR(std::abs(x[0] - image[static_cast<Eigen::Index>(*t.point_index(b))]), 0.0, 1e-13);
}

TEST(Apply, ShiftsCommute) {
  std::mt19937_64 rng(32);
  for (auto f : essnorm::testing::builtin_families()) {
    const WeightSet w(f, 3);
    const Domain d = Domain::ambient(3, 2);
    for (int t = 0; t < 5; ++t) {
      const auto v = random_vector(rng, d, 12);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
          const auto a = essnorm::apply(shift_op(w, i, d), essnorm::apply(shift_op(w, j, d), v));
          const auto b = essnorm::apply(shift_op(w, j, d), essnorm::apply(shift_op(w, i, d), v));
          EXPECT_LE(distance(a, b), 1e-12);
        }
    }
  }
}

TEST(Apply, SubmoduleInvariance) {
  std::mt19937_64 rng(33);
  const auto w = WeightSet::drury_arveson(2);
  for (int t = 0; t < 20; ++t) {
    const auto s = essnorm::testing::random_submodule(rng, 2, 2, 4, 3);
    const Domain d = Domain::submodule(s);
    const auto v = random_vector(rng, d, 10);
    for (std::size_t i = 0; i < 2; ++i) {
      // Y_i is Z_i restricted; on S its ambient image must already lie in S,
      // so the compression loses nothing.
      const auto y = essnorm::apply(shift_op(w, i, d), v);
      double in = 0.0, out = 0.0;
      for (const auto& [b, x] : v) in += std::pow(w.ratio(i, b), 2) * x.squaredNorm();
      for (const auto& [b, x] : y) out += x.squaredNorm();
      EXPECT_NEAR(in, out, 1e-12);
    }
  }
}

TEST(LatticeOperator, OffDomainBlocksAreEmpty) {
  const auto s = VectorSubmodule::scalar(closure(2, {{2, 3}}));
  const auto y = shift_op(WeightSet::drury_arveson(2), 1, Domain::submodule(s));
  EXPECT_EQ(y.coefficient({1, 1}).size(), 0);
  EXPECT_EQ(y.scalar_coefficient({1, 1}), 0.0);
  EXPECT_NE(y.scalar_coefficient({2, 3}), 0.0);
}
