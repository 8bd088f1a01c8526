#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "essnorm/oracle.hpp"
#include "essnorm/weights.hpp"
#include "random_inputs.hpp"

using namespace essnorm;

namespace {

double multinomial_inverse(const MultiIndex& a) {
  double v = std::lgamma(a.degree() + 1.0);
  double s = 0.0;
  for (int x : a) s += std::lgamma(x + 1.0);
  return std::exp(s - v);
}

}  // namespace

TEST(Weights, ClosedForms) {
  EXPECT_NEAR(WeightSet::drury_arveson(2).lambda({1, 1}), 0.7071067811865476, 1e-15);
  EXPECT_NEAR(WeightSet(WeightFamily::factorial_ratio, 2).lambda({1, 1}), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(WeightSet::unweighted(3).lambda({4, 0, 7}), 1.0);
  for (auto f : essnorm::testing::builtin_families()) EXPECT_NEAR(WeightSet(f, 3).lambda({0, 0, 0}), 1.0, 1e-15) << to_string(f);
}

TEST(Weights, BallFamiliesMatchFactorialForms) {
  // sqrt((m-1)! a! / (|a|+m-1)!) and sqrt(m! a! / (|a|+m)!)
  const std::size_t m = 3;
  const MultiIndex a{2, 1, 4};
  double fa = 0.0;
  for (int x : a) fa += std::lgamma(x + 1.0);
  const double hardy = 0.5 * (std::lgamma(m) + fa - std::lgamma(a.degree() + m));
  const double bergman = 0.5 * (std::lgamma(m + 1.0) + fa - std::lgamma(a.degree() + m + 1.0));
  EXPECT_NEAR(WeightSet(WeightFamily::hardy_ball_like, m).log_lambda(a), hardy, 1e-12);
  EXPECT_NEAR(WeightSet(WeightFamily::bergman_ball_like, m).log_lambda(a), bergman, 1e-12);
}

TEST(Weights, StepRatios) {
  const auto w = WeightSet::drury_arveson(2);
  EXPECT_DOUBLE_EQ(w.ratio(0, {0, 0}), 1.0);
  EXPECT_NEAR(w.ratio(0, {1, 1}), 0.816496580927726, 1e-12);
  EXPECT_DOUBLE_EQ(WeightSet::unweighted(2).ratio(1, {3, 3}), 1.0);
}

TEST(Weights, DruryArvesonRatioSquaredUpToDegree200) {
  const auto w = WeightSet::drury_arveson(3);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 2000; ++t) {
    const auto a = essnorm::testing::random_point(rng, 3, 200, 200);
    for (std::size_t i = 0; i < 3; ++i) {
      const double r = w.ratio(i, a);
      const double expect = (a[i] + 1.0) / (a.degree() + 1.0);
      EXPECT_NEAR(r * r / expect, 1.0, 1e-12);
    }
  }
}

TEST(Weights, FactorialOracle) {
  const auto w = WeightSet::drury_arveson(2);
  const auto lit = WeightSet(WeightFamily::factorial_ratio, 2);
  for (int x = 0; x < 12; ++x)
    for (int y = 0; y < 12; ++y) {
      const MultiIndex a{x, y};
      EXPECT_NEAR(lit.lambda(a) / multinomial_inverse(a), 1.0, 1e-12);
      EXPECT_NEAR(w.lambda(a) / std::sqrt(multinomial_inverse(a)), 1.0, 1e-12);
    }
}

TEST(Weights, PathIndependence) {
  std::mt19937_64 rng(11);
  for (auto f : essnorm::testing::builtin_families()) {
    const WeightSet w(f, 3);
    for (int t = 0; t < 60; ++t) {
      const auto target = essnorm::testing::random_point(rng, 3, 40, 40);
      // Two random monotone paths from 0 to target.
      for (int path = 0; path < 2; ++path) {
        MultiIndex a(3);
        double log_prod = 0.0;
        while (a != target) {
          std::size_t i;
          do i = static_cast<std::size_t>(essnorm::testing::uniform(rng, 0, 2));
          while (a[i] == target[i]);
          log_prod += std::log(w.ratio(i, a));
          a = a.plus_unit(i);
        }
        EXPECT_NEAR(std::exp(log_prod - w.log_lambda(target)), 1.0, 1e-12) << to_string(f) << " " << target;
      }
    }
  }
}

TEST(Weights, CustomTable) {
  std::map<MultiIndex, double> table{{{0, 0}, 1.0}, {{1, 0}, 2.0}, {{0, 1}, 0.5}};
  const auto w = WeightSet::custom(2, table, ExtendPolicy::error);
  EXPECT_DOUBLE_EQ(w.ratio(0, {0, 0}), 2.0);
  EXPECT_THROW(w.lambda({1, 1}), WeightUndefined);
  try {
    w.lambda({3, 0});
  } catch (const WeightUndefined& e) {
    EXPECT_NE(std::string(e.what()).find("weight undefined"), std::string::npos);
  }
  const auto ext = WeightSet::custom(2, {{{0, 0}, 1.0}, {{1, 0}, 0.5}, {{0, 1}, 0.5}, {{1, 1}, 0.25}}, ExtendPolicy::product_extend);
  EXPECT_NEAR(ext.lambda({3, 1}), 0.25 * 0.5 * 0.5, 1e-15);
  EXPECT_NEAR(ext.ratio(1, {4, 4}), 0.5, 1e-15);
}

TEST(Weights, SliceRestriction) {
  const auto w = WeightSet::drury_arveson(3);
  const auto s = w.restrict_to_slice(1, 2);
  EXPECT_EQ(s.dimension(), 2u);
  EXPECT_NEAR(s.ratio(0, {1, 3}), w.ratio(0, {1, 2, 3}), 1e-15);
  EXPECT_NEAR(s.ratio(1, {1, 3}), w.ratio(2, {1, 2, 3}), 1e-15);
  const auto both = w.restrict_to_slice(std::vector<AxisLevel>{{0, 1}, {2, 4}});
  EXPECT_EQ(both.dimension(), 1u);
  EXPECT_NEAR(both.ratio(0, {5}), w.ratio(1, {1, 5, 4}), 1e-15);
}

TEST(Contractive, BuiltinsHold) {
  for (auto f : essnorm::testing::builtin_families()) EXPECT_TRUE(check_contractive(WeightSet(f, 2), 100).holds) << to_string(f);
  EXPECT_TRUE(check_contractive(WeightSet::drury_arveson(3), 60).holds);
  const auto u = check_contractive(WeightSet::unweighted(2), 30);
  EXPECT_DOUBLE_EQ(u.worst, 1.0);
}

TEST(Contractive, CounterexampleWitness) {
  const auto w = WeightSet::custom(2, {{{0, 0}, 1.0}, {{1, 0}, 2.0}, {{0, 1}, 1.0}, {{1, 1}, 1.0}}, ExtendPolicy::product_extend);
  const auto r = check_contractive(w, 3);
  EXPECT_FALSE(r.holds);
  ASSERT_TRUE(r.witness);
  EXPECT_EQ(*r.witness, (MultiIndex{0, 0}));
  EXPECT_EQ(*r.axis, 0u);
}

TEST(Spherical, DruryArvesonAndUnweightedViolateAtOrigin) {
  for (auto w : {WeightSet::drury_arveson(2), WeightSet::unweighted(2)}) {
    const auto r = check_spherical(w, 60);
    EXPECT_FALSE(r.holds);
    EXPECT_EQ(*r.witness, (MultiIndex{0, 0}));
    EXPECT_DOUBLE_EQ(r.worst, 2.0);
    // The dense oracle's sum of Z_i^* Z_i has the same diagonal at the origin.
    const auto t = DenseTruncation::build(w, DomainKind::ambient, std::nullopt, 4);
    const CMatrix s = t.shift(0).adjoint() * t.shift(0) + t.shift(1).adjoint() * t.shift(1);
    EXPECT_NEAR(s(0, 0).real(), 2.0, 1e-14);
  }
}

TEST(Spherical, RapidlyDecreasingWeightsHold) {
  std::map<MultiIndex, double> table;
  for (long n = 0; n <= 31; ++n)
    for_each_in_shell(2, n, [&](const MultiIndex& a) { table.emplace(a, std::exp(-0.5 * std::lgamma(n + 2.0))); });
  const auto r = check_spherical(WeightSet::custom(2, table, ExtendPolicy::error), 30);
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(r.worst, 1.0, 1e-12);
}
