#include <gtest/gtest.h>

#include <random>

#include "essnorm/submodule.hpp"
#include "random_inputs.hpp"

using namespace essnorm;

namespace {

CVector vec(std::initializer_list<Complex> xs) {
  CVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index r = 0;
  for (auto x : xs) v[r++] = x;
  return v;
}

VectorSubmodule two_generator_example() {
  return {2, 2, {{{0, 2}, vec({1.0, 0.0})}, {{0, 0}, vec({0.0, 1.0})}}};
}

std::size_t brute_rank(const VectorSubmodule& s, const MultiIndex& b) {
  std::vector<CVector> cols;
  for (const auto& g : s.generators())
    if (g.alpha.divides(b)) cols.push_back(g.x);
  if (cols.empty()) return 0;
  CMatrix a(static_cast<Eigen::Index>(s.multiplicity()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) a.col(static_cast<Eigen::Index>(c)) = cols[c];
  Eigen::JacobiSVD<CMatrix> svd(a);
  std::size_t r = 0;
  for (Eigen::Index t = 0; t < svd.singularValues().size(); ++t) r += svd.singularValues()[t] > 1e-10 ? 1 : 0;
  return r;
}

}  // namespace

TEST(Submodule, FiberExample) {
  const auto s = two_generator_example();
  const auto f0 = s.fiber({0, 0});
  ASSERT_EQ(f0->dim(), 1u);
  EXPECT_NEAR(std::abs(f0->basis(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(f0->basis(0, 0)), 0.0, 1e-15);
  EXPECT_EQ(s.fiber_dim({0, 2}), 2u);
  EXPECT_EQ(s.fiber_dim({5, 1}), 1u);
}

TEST(Submodule, ScalarCone) {
  const auto s = VectorSubmodule::scalar(closure(2, {{2, 3}}));
  for (int x = 0; x < 6; ++x)
    for (int y = 0; y < 6; ++y) EXPECT_EQ(s.fiber_dim({x, y}), (x >= 2 && y >= 3) ? 1u : 0u);
}

TEST(Submodule, ColinearVectorsCountOnce) {
  const CVector v = vec({1.0, Complex(0.0, 2.0)});
  const VectorSubmodule s(2, 2, {{{1, 0}, v}, {{0, 1}, 2.0 * v}});
  EXPECT_EQ(s.fiber_dim({1, 1}), 1u);
}

TEST(Submodule, InvalidGenerators) {
  EXPECT_THROW(VectorSubmodule(2, 2, {{{1, 0}, CVector::Zero(2)}}), std::invalid_argument);
  EXPECT_THROW(VectorSubmodule(2, 2, {{{1, 0, 0}, CVector::Ones(2)}}), std::invalid_argument);
  EXPECT_THROW(VectorSubmodule(2, 2, {{{1, 0}, CVector::Ones(3)}}), std::invalid_argument);
}

TEST(Submodule, BasesOrthonormalAndComplementary) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 40; ++t) {
    const std::size_t k = static_cast<std::size_t>(1 + t % 3);
    const auto s = essnorm::testing::random_submodule(rng, 3, k, 4, 4);
    for (int u = 0; u < 30; ++u) {
      const auto b = essnorm::testing::random_point(rng, 3, 6, 18);
      const auto f = s.fiber(b);
      const auto q = s.quotient_fiber(b);
      ASSERT_EQ(f->dim() + q->dim(), k);
      CMatrix all(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
      all << f->basis, q->basis;
      EXPECT_LE((all.adjoint() * all - CMatrix::Identity(all.cols(), all.cols())).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Submodule, FiberDimMatchesRankOracle) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 40; ++t) {
    const auto s = essnorm::testing::random_submodule(rng, 2 + t % 2, 1 + t % 3, 4, 5);
    for (int u = 0; u < 50; ++u) {
      const auto b = essnorm::testing::random_point(rng, s.dimension(), 6, 30);
      EXPECT_EQ(s.fiber_dim(b), brute_rank(s, b)) << b;
    }
  }
}

TEST(Submodule, FibersAreNested) {
  std::mt19937_64 rng(23);
  const auto s = essnorm::testing::random_submodule(rng, 3, 3, 4, 5);
  for (int t = 0; t < 10000; ++t) {
    const auto b = essnorm::testing::random_point(rng, 3, 7, 30);
    const auto j = static_cast<std::size_t>(essnorm::testing::uniform(rng, 0, 2));
    ASSERT_LE(s.fiber_dim(b), s.fiber_dim(b.plus_unit(j)));
  }
  EXPECT_LE(s.cached_patterns(), std::size_t{1} << s.generators().size());
}

TEST(Submodule, QuotientComplements) {
  const VectorSubmodule none(2, 2, {});
  EXPECT_EQ(none.quotient_fiber({3, 3})->dim(), 2u);
  EXPECT_EQ(VectorSubmodule::whole(2, 2).quotient_fiber({0, 0})->dim(), 0u);
  const auto q = two_generator_example().quotient_fiber({0, 0});
  ASSERT_EQ(q->dim(), 1u);
  EXPECT_NEAR(std::abs(q->basis(0, 0)), 1.0, 1e-15);
}

TEST(Filtration, ExampleBreakpoints) {
  const auto f = filtration_along(two_generator_example(), std::vector<AxisLevel>{{0, 0}}, 1);
  EXPECT_EQ(f.breakpoints, (std::vector<int>{0, 2}));
  ASSERT_EQ(f.jump_spaces.size(), 2u);
  EXPECT_EQ(f.jump_spaces[0].cols(), 1);
  EXPECT_EQ(f.jump_spaces[1].cols(), 1);
  EXPECT_EQ(f.final_dim(), 2u);
}

TEST(Filtration, ScalarConeSingleBreakpoint) {
  const auto f = filtration_along(VectorSubmodule::scalar(closure(2, {{2, 3}})), std::vector<AxisLevel>{{0, 2}}, 1);
  EXPECT_EQ(f.breakpoints, (std::vector<int>{3}));
}

TEST(Filtration, OnlyRootedGeneratorBelowItsLevel) {
  const VectorSubmodule s(2, 2, {{{2, 1}, vec({1.0, 0.0})}, {{0, 0}, vec({0.0, 1.0})}});
  const auto f = filtration_along(s, std::vector<AxisLevel>{{0, 1}}, 1);
  EXPECT_EQ(f.breakpoints, (std::vector<int>{0}));
  EXPECT_EQ(f.final_dim(), 1u);
}

TEST(Filtration, JumpSpacesAddUpAndStabilize) {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 40; ++t) {
    const auto s = essnorm::testing::random_submodule(rng, 3, 3, 5, 5);
    const auto base = essnorm::testing::random_point(rng, 3, 6, 18);
    for (std::size_t axis = 0; axis < 3; ++axis) {
      const auto f = filtration_along(s, base, axis);
      std::size_t total = 0;
      for (std::size_t u = 0; u < f.jump_spaces.size(); ++u) {
        total += static_cast<std::size_t>(f.jump_spaces[u].cols());
        EXPECT_GT(f.jump_spaces[u].cols(), 0);
        if (u) EXPECT_LT(f.breakpoints[u - 1], f.breakpoints[u]);
      }
      EXPECT_EQ(total, f.final_dim());
      int reach = 0;
      for (const auto& g : s.generators()) reach = std::max(reach, g.alpha[axis]);
      if (!f.breakpoints.empty()) EXPECT_LE(f.breakpoints.back(), reach);
      MultiIndex top = base;
      top[axis] = reach;
      EXPECT_EQ(s.fiber_dim(top), f.final_dim());
    }
  }
}
