#pragma once

#include <random>
#include <vector>

#include "essnorm/essnorm.hpp"

namespace essnorm::testing {

inline const std::vector<WeightFamily>& builtin_families() {
  static const std::vector<WeightFamily> f{WeightFamily::drury_arveson, WeightFamily::factorial_ratio, WeightFamily::hardy_ball_like,
                                           WeightFamily::bergman_ball_like, WeightFamily::unweighted};
  return f;
}

inline int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Random point with entries in [0, cap] and total degree at most max_degree.
inline MultiIndex random_point(std::mt19937_64& rng, std::size_t m, int cap, long max_degree) {
  while (true) {
    MultiIndex a(m);
    for (std::size_t i = 0; i < m; ++i) a[i] = uniform(rng, 0, cap);
    if (a.degree() <= max_degree) return a;
  }
}

inline ShiftInvariantSet random_set(std::mt19937_64& rng, std::size_t m, int cap, long max_degree, int max_generators) {
  std::vector<MultiIndex> pts;
  const int n = uniform(rng, 1, max_generators);
  for (int t = 0; t < n; ++t) pts.push_back(random_point(rng, m, cap, max_degree));
  return closure(m, pts);
}

/// Random multiplicity-k submodule; vectors have small dyadic entries so
/// rank decisions are exact, and are made colinear now and then.
inline VectorSubmodule random_submodule(std::mt19937_64& rng, std::size_t m, std::size_t k, int cap, int max_generators) {
  std::vector<Generator> gens;
  const int n = uniform(rng, 1, max_generators);
  for (int t = 0; t < n; ++t) {
    Generator g;
    g.alpha = random_point(rng, m, cap, 1L << 20);
    g.x = CVector::Zero(static_cast<Eigen::Index>(k));
    if (t > 0 && uniform(rng, 0, 4) == 0) {
      g.x = gens.front().x * Complex(0.5 * uniform(rng, 1, 4), 0.0);
    } else {
      while (g.x.norm() == 0.0)
        for (Eigen::Index r = 0; r < g.x.size(); ++r) g.x[r] = Complex(0.25 * uniform(rng, -4, 4), k > 1 ? 0.25 * uniform(rng, -2, 2) : 0.0);
    }
    gens.push_back(std::move(g));
  }
  return {m, k, std::move(gens)};
}

}  // namespace essnorm::testing
