#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "essnorm/multi_index.hpp"
#include "essnorm/parallel.hpp"
#include "essnorm/schatten.hpp"
#include "essnorm/shiftops.hpp"
#include "essnorm/submodule.hpp"
#include "essnorm/weights.hpp"

namespace essnorm {

/// sum over |beta| = n of (k - dim H_beta): the graded piece of M (x) C^k / S.
inline std::int64_t quotient_count(const VectorSubmodule& s, long n) {
  if (n < 0) throw std::invalid_argument("shell index must be nonnegative");
  const auto k = static_cast<std::int64_t>(s.multiplicity());
  std::int64_t c = 0;
  if (s.is_scalar()) {
    const ShiftInvariantSet b = s.support();
    for_each_in_shell(s.dimension(), n, [&](const MultiIndex& x) { c += b.contains(x) ? 0 : 1; });
    return c;
  }
  for_each_in_shell(s.dimension(), n, [&](const MultiIndex& x) { c += k - static_cast<std::int64_t>(s.fiber_dim(x)); });
  return c;
}

/// Cumulative quotient counts c(n) for n = 0..N.
struct CountingFunction {
  std::vector<std::int64_t> shell;
  std::vector<std::int64_t> cumulative;
};

inline CountingFunction counting_function(const VectorSubmodule& s, long max_degree, std::size_t threads = thread_count()) {
  CountingFunction f;
  f.shell = parallel_map<std::int64_t>(0, max_degree, [&](long n) { return quotient_count(s, n); }, threads);
  std::int64_t acc = 0;
  for (auto v : f.shell) f.cumulative.push_back(acc += v);
  return f;
}

struct SamuelReport {
  /// Degree of the eventual cumulative polynomial; -1 for the zero quotient.
  int d = -1;
  long stabilization_shell = 0;
  long shells_computed = 0;
  /// c(n) = sum_j binomial[j] * C(n, j) for n >= stabilization_shell.
  std::vector<std::int64_t> binomial;
  /// Same polynomial in the monomial basis.
  std::vector<double> polynomial;
  /// m - (smallest number of pinned axes over the quotient's slice blocks).
  int d_blocks = -1;
  int smallest_pinned = 0;
  bool agree = true;
  CountingFunction counts;
};

inline constexpr long kSamuelCap = 2000;

namespace detail {

/// Highest order with a nonzero forward difference over c[a..a+len-1],
/// -1 if all values vanish.  Differences of order > `max_order` must vanish
/// for the window to count as polynomial; returns nullopt otherwise.
inline std::optional<int> window_degree(const std::vector<std::int64_t>& c, std::size_t a, std::size_t len, int max_order) {
  std::vector<std::int64_t> row(c.begin() + static_cast<std::ptrdiff_t>(a), c.begin() + static_cast<std::ptrdiff_t>(a + len));
  int deg = -1;
  for (int order = 0; !row.empty(); ++order) {
    if (std::any_of(row.begin(), row.end(), [](std::int64_t v) { return v != 0; })) {
      if (order > max_order) return std::nullopt;
      deg = order;
    }
    for (std::size_t t = 0; t + 1 < row.size(); ++t) row[t] = row[t + 1] - row[t];
    row.pop_back();
  }
  return deg;
}

/// Degree from the clamp box [0, M] of the generators: past M every fiber is
/// constant, so the quotient is a union of pieces {beta_i = c_i for c_i < M_i}
/// and the widest piece decides the growth.
inline std::pair<int, int> block_dimension(const VectorSubmodule& s) {
  const std::size_t m = s.dimension();
  const MultiIndex box = s.generator_box();
  int best = -1;
  for_each_in_box(MultiIndex(m), box, [&](const MultiIndex& c) {
    if (s.fiber_dim(c) == s.multiplicity()) return;
    int free = 0;
    for (std::size_t i = 0; i < m; ++i) free += c[i] == box[i] ? 1 : 0;
    best = std::max(best, free);
  });
  return {best, best < 0 ? static_cast<int>(m) + 1 : static_cast<int>(m) - best};
}

inline std::vector<double> monomial_coefficients(const std::vector<std::int64_t>& binomial) {
  // C(n, j) = falling(n, j) / j!, expanded by repeated multiplication.
  std::vector<double> out(binomial.size(), 0.0);
  std::vector<double> falling{1.0};
  double fact = 1.0;
  for (std::size_t j = 0; j < binomial.size(); ++j) {
    if (j) {
      fact *= static_cast<double>(j);
      std::vector<double> next(falling.size() + 1, 0.0);
      for (std::size_t t = 0; t < falling.size(); ++t) {
        next[t + 1] += falling[t];
        next[t] -= static_cast<double>(j - 1) * falling[t];
      }
      falling = std::move(next);
    }
    for (std::size_t t = 0; t < falling.size(); ++t) out[t] += static_cast<double>(binomial[j]) * falling[t] / fact;
  }
  return out;
}

}  // namespace detail

/// Hilbert-Samuel dimension of the quotient by S: the degree of the
/// eventually polynomial cumulative count.  Shells are extended (doubling,
/// capped at 2000) until three consecutive windows of m + 2 values have
/// vanishing (m+1)-th differences.
inline SamuelReport dimension(const VectorSubmodule& s, long max_degree = 32, std::size_t threads = thread_count()) {
  const std::size_t m = s.dimension();
  const std::size_t len = m + 2;
  const long floor = static_cast<long>(s.generator_box().degree() + static_cast<long>(len) + 3);
  long n_max = std::max(max_degree, floor);
  SamuelReport r;
  while (true) {
    n_max = std::min(n_max, kSamuelCap);
    r.counts = counting_function(s, n_max, threads);
    const auto& c = r.counts.cumulative;
    const std::size_t total = c.size();
    std::optional<std::size_t> start;
    for (std::size_t a = total - len + 1; a-- > 0;) {
      if (!detail::window_degree(c, a, len, static_cast<int>(m))) break;
      start = a;
    }
    if (start && total - *start >= len + 2) {
      r.stabilization_shell = static_cast<long>(*start);
      r.shells_computed = n_max;
      r.d = *detail::window_degree(c, *start, len, static_cast<int>(m));
      break;
    }
    if (n_max >= kSamuelCap) throw std::runtime_error("counting function did not stabilize by shell " + std::to_string(kSamuelCap));
    n_max *= 2;
  }
  // Extrapolate the tail polynomial back to n = 0..d and read off its
  // binomial coefficients.
  if (r.d >= 0) {
    const auto& c = r.counts.cumulative;
    const std::size_t a = static_cast<std::size_t>(r.stabilization_shell);
    std::vector<std::int64_t> diffs;
    std::vector<std::int64_t> row(c.begin() + static_cast<std::ptrdiff_t>(a), c.begin() + static_cast<std::ptrdiff_t>(a + r.d + 1));
    for (int o = 0; o <= r.d; ++o) {
      diffs.push_back(row.front());
      for (std::size_t t = 0; t + 1 < row.size(); ++t) row[t] = row[t + 1] - row[t];
      row.pop_back();
    }
    // Step the difference table backward a times: D_j(n-1) = D_j(n) - D_{j+1}(n-1).
    for (std::size_t step = 0; step < a; ++step)
      for (int o = r.d - 1; o >= 0; --o) diffs[static_cast<std::size_t>(o)] -= diffs[static_cast<std::size_t>(o + 1)];
    r.binomial = diffs;
    r.polynomial = detail::monomial_coefficients(r.binomial);
  }
  const auto [blocks, pinned] = detail::block_dimension(s);
  r.d_blocks = blocks;
  r.smallest_pinned = pinned;
  r.agree = r.d == r.d_blocks;
  return r;
}

struct ThresholdEntry {
  double q = 0.0;
  Verdict verdict = Verdict::inconclusive;
  bool expected_converged = false;
  bool boundary = false;
  bool consistent = true;
  std::vector<OperatorVerdict> tests;
};

struct ThresholdReport {
  SamuelReport samuel;
  std::vector<ThresholdEntry> entries;
  bool consistent = true;
};

/// For each q, the worst Schatten verdict over the quotient compressions
/// [N_i^*, N_j], compared with "converged iff q > d".  Orders within the
/// margin of d are reported as boundary cases and not scored.
inline ThresholdReport threshold_consistency(const VectorSubmodule& s, const WeightSet& w, const std::vector<double>& qs,
                                             const VerdictOptions& o = {}) {
  if (w.dimension() != s.dimension()) throw std::invalid_argument("weights and submodule differ in dimension");
  ThresholdReport rep;
  rep.samuel = dimension(s);
  const Domain d = Domain::quotient(s);
  const std::size_t m = s.dimension();
  for (double q : qs) {
    ThresholdEntry e;
    e.q = q;
    e.verdict = Verdict::converged;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const auto op = commutator(w, i, j, d);
        e.tests.push_back({"[N" + std::to_string(i + 1) + "*,N" + std::to_string(j + 1) + "]", verdict(op, q, o)});
        e.verdict = worst(e.verdict, e.tests.back().result.verdict);
      }
    e.expected_converged = q > rep.samuel.d;
    e.boundary = std::abs(q - rep.samuel.d) <= o.margin;
    e.consistent = e.boundary || ((e.verdict == Verdict::converged) == e.expected_converged);
    rep.consistent = rep.consistent && e.consistent;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

}  // namespace essnorm
