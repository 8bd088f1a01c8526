#include <gtest/gtest.h>

#include <random>
#include <set>

#include "essnorm/lattice.hpp"
#include "random_inputs.hpp"

using namespace essnorm;

namespace {

std::vector<MultiIndex> shell_points(std::size_t m, long n) {
  std::vector<MultiIndex> out;
  for_each_in_shell(m, n, [&](const MultiIndex& a) { out.push_back(a); });
  return out;
}

}  // namespace

TEST(MultiIndex, DegreeIsEntrySum) {
  const MultiIndex a{2, 0, 5};
  EXPECT_EQ(a.degree(), 7);
  EXPECT_EQ(a.str(), "(2,0,5)");
  EXPECT_THROW(MultiIndex({1, -1}), std::invalid_argument);
  EXPECT_THROW(MultiIndex(kMaxVars + 1), std::invalid_argument);
}

TEST(MultiIndex, ShellOrderIsLexicographic) {
  EXPECT_EQ(shell_points(2, 3), (std::vector<MultiIndex>{{0, 3}, {1, 2}, {2, 1}, {3, 0}}));
  EXPECT_EQ(shell_points(3, 2).size(), 6u);
  const auto s = shell_points(3, 5);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
}

TEST(MultiIndex, ShellSizeMatchesStarsAndBars) {
  for (std::size_t m = 1; m <= 5; ++m)
    for (long n = 0; n <= 12; ++n) {
      EXPECT_EQ(shell_points(m, n).size(), shell_size(m, n)) << "m=" << m << " n=" << n;
      std::uint64_t c = 1;
      for (std::size_t j = 1; j < m; ++j) c = c * static_cast<std::uint64_t>(n + static_cast<long>(j)) / j;
      EXPECT_EQ(shell_size(m, n), c);
    }
}

TEST(ShiftInvariantSet, SingleCone) {
  const auto b = closure(2, {{2, 3}});
  EXPECT_EQ(b.generators(), (std::vector<MultiIndex>{{2, 3}}));
  EXPECT_TRUE(b.contains({2, 3}));
  EXPECT_FALSE(b.contains({1, 5}));
}

TEST(ShiftInvariantSet, MaximalIdeal) {
  const auto b = closure(2, {{1, 0}, {0, 1}});
  EXPECT_FALSE(b.contains({0, 0}));
  for (long n = 1; n <= 6; ++n)
    for (const auto& a : shell_points(2, n)) EXPECT_TRUE(b.contains(a));
}

TEST(ShiftInvariantSet, ComplementInDegreeFiveBox) {
  const auto b = closure(2, {{2, 0}, {0, 3}, {1, 1}});
  EXPECT_EQ(b.generators().size(), 3u);
  std::vector<MultiIndex> missing;
  for (long n = 0; n <= 5; ++n)
    for (const auto& a : shell_points(2, n))
      if (!b.contains(a)) missing.push_back(a);
  std::sort(missing.begin(), missing.end());
  EXPECT_EQ(missing, (std::vector<MultiIndex>{{0, 0}, {0, 1}, {0, 2}, {1, 0}}));
}

TEST(ShiftInvariantSet, EmptySetIsLegal) {
  const auto b = closure(3, {});
  EXPECT_TRUE(b.empty());
  EXPECT_FALSE(b.contains({0, 0, 0}));
  EXPECT_THROW(corner(b), std::domain_error);
}

TEST(MinimalGenerators, DominatedRemoved) {
  EXPECT_EQ(minimal_generators(closure(2, {{2, 3}, {3, 3}, {2, 4}})), (std::vector<MultiIndex>{{2, 3}}));
  auto g = minimal_generators(closure(2, {{1, 0}, {0, 1}, {1, 1}}));
  std::sort(g.begin(), g.end());
  EXPECT_EQ(g, (std::vector<MultiIndex>{{0, 1}, {1, 0}}));
}

TEST(MinimalGenerators, RandomAntichainAndRoundTrip) {
  std::mt19937_64 rng(66);
  for (int t = 0; t < 40; ++t) {
    std::vector<MultiIndex> raw;
    for (int u = 0; u < 6; ++u) raw.push_back(essnorm::testing::random_point(rng, 3, 10, 30));
    const auto b = closure(3, raw);
    const auto g = minimal_generators(b);
    // Brute-force minimal elements of the raw points.
    std::set<MultiIndex> brute;
    for (const auto& a : raw) {
      bool minimal = true;
      for (const auto& c : raw)
        if (c != a && c.divides(a)) minimal = false;
      if (minimal) brute.insert(a);
    }
    EXPECT_EQ(std::set<MultiIndex>(g.begin(), g.end()), brute);
    const auto back = closure(3, g);
    for (long n = 0; n <= 14; ++n)
      for (const auto& a : shell_points(3, n)) EXPECT_EQ(back.contains(a), b.contains(a));
  }
}

TEST(ShiftInvariantSet, MembershipIsMonotone) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 30; ++t) {
    const auto b = essnorm::testing::random_set(rng, 3, 6, 12, 4);
    for (int s = 0; s < 200; ++s) {
      const auto a = essnorm::testing::random_point(rng, 3, 10, 30);
      if (!b.contains(a)) continue;
      for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(b.contains(a.plus_unit(i)));
    }
  }
}

TEST(Corner, Examples) {
  EXPECT_EQ(corner(closure(2, {{2, 0}, {0, 3}})), (MultiIndex{0, 0}));
  EXPECT_EQ(corner(closure(2, {{2, 3}})), (MultiIndex{2, 3}));
  EXPECT_EQ(corner(closure(3, {{4, 1, 2}, {2, 5, 3}})), (MultiIndex{2, 1, 2}));
}

TEST(CofiniteDifference, TwoGeneratorStaircase) {
  const auto d = cofinite_difference(closure(2, {{2, 0}, {0, 3}}));
  ASSERT_TRUE(d.finite);
  std::vector<MultiIndex> pts = d.points;
  std::sort(pts.begin(), pts.end());
  EXPECT_EQ(pts, (std::vector<MultiIndex>{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}}));
  EXPECT_EQ(d.box_hi, (MultiIndex{2, 3}));
}

TEST(CofiniteDifference, ConeAndRays) {
  EXPECT_TRUE(cofinite_difference(closure(2, {{2, 3}})).points.empty());
  const auto one = cofinite_difference(closure(3, {{1, 0, 0}}));
  EXPECT_TRUE(one.finite);
  EXPECT_TRUE(one.points.empty());
  const auto ray = cofinite_difference(closure(3, {{1, 0, 0}, {0, 1, 0}}));
  EXPECT_FALSE(ray.finite);
  ASSERT_TRUE(ray.witness_axis);
  EXPECT_EQ(*ray.witness_axis, 2u);
}

TEST(CofiniteDifference, TwoVariablesAlwaysFiniteInBox) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 60; ++t) {
    const auto b = essnorm::testing::random_set(rng, 2, 9, 18, 5);
    const auto d = cofinite_difference(b);
    ASSERT_TRUE(d.finite);
    for (const auto& p : d.points) {
      EXPECT_TRUE(d.corner.divides(p));
      EXPECT_TRUE(p.divides(d.box_hi));
      EXPECT_FALSE(b.contains(p));
    }
  }
}

TEST(Slice, Examples) {
  const auto b = closure(2, {{2, 3}});
  EXPECT_EQ(slice(b, 0, 2).generators(), (std::vector<MultiIndex>{{3}}));
  EXPECT_TRUE(slice(b, 0, 1).empty());
  EXPECT_EQ(slice(closure(2, {{2, 0}, {0, 3}}), 0, 0).generators(), (std::vector<MultiIndex>{{3}}));
  EXPECT_EQ(slice(ShiftInvariantSet::full(2), 1, 7).generators(), (std::vector<MultiIndex>{{0}}));
}

TEST(Slice, NestedAlongAxis) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 30; ++t) {
    const auto b = essnorm::testing::random_set(rng, 3, 6, 12, 4);
    for (std::size_t i = 0; i < 3; ++i)
      for (int k = 0; k < 7; ++k) {
        const auto lo = slice(b, i, k);
        const auto hi = slice(b, i, k + 1);
        for (long n = 0; n <= 10; ++n)
          for (const auto& a : shell_points(2, n))
            if (lo.contains(a)) EXPECT_TRUE(hi.contains(a));
      }
  }
}

TEST(Shell, FilteredByMembership) {
  EXPECT_EQ(shell(closure(2, {{1, 1}}), 3), (std::vector<MultiIndex>{{1, 2}, {2, 1}}));
  EXPECT_EQ(shell(2, 3).size(), 4u);
}

TEST(CommonZeros, Examples) {
  using Sets = std::vector<std::vector<std::size_t>>;
  EXPECT_EQ(common_zero_coordinates({{2, 3}}), (Sets{{0}, {1}}));
  EXPECT_EQ(common_zero_coordinates({{1, 0}, {0, 1}}), (Sets{{0, 1}}));
  EXPECT_EQ(common_zero_coordinates({{1, 1, 0}, {0, 1, 1}, {1, 0, 1}}), (Sets{{0, 1}, {0, 2}, {1, 2}}));
  EXPECT_THROW(common_zero_coordinates({{0, 0}}), std::domain_error);
}
