#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "essnorm/multi_index.hpp"
#include "essnorm/parallel.hpp"
#include "essnorm/shiftops.hpp"
#include "essnorm/weights.hpp"

namespace essnorm {

/// Neumaier compensated summation.
class CompensatedSum {
public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace detail {

/// Singular values of op on shell n, in lexicographic point order.  A
/// displacement-homogeneous operator sends distinct points to distinct
/// points, so these are exactly the union of the block singular values.
inline void append_shell_singular_values(const LatticeOperator& op, long n, std::vector<double>& out) {
  const Domain& d = op.domain();
  MultiIndex tgt;
  if (op.is_scalar()) {
    for_each_in_shell(op.dimension(), n, [&](const MultiIndex& b) {
      if (!d.contains(b)) return;
      if (!op.target(b, tgt) || !d.contains(tgt)) return;
      out.push_back(std::abs(op.scalar_coefficient(b)));
    });
    return;
  }
  for_each_in_shell(op.dimension(), n, [&](const MultiIndex& b) {
    const CMatrix blk = op.coefficient(b);
    if (blk.rows() == 0 || blk.cols() == 0) return;
    if (blk.size() == 1) {
      out.push_back(std::abs(blk(0, 0)));
      return;
    }
    Eigen::JacobiSVD<CMatrix> svd(blk);
    for (Eigen::Index t = 0; t < svd.singularValues().size(); ++t) out.push_back(svd.singularValues()[t]);
  });
}

}  // namespace detail

/// Singular values of op restricted to shell n, sorted descending.
inline std::vector<double> shell_singular_values(const LatticeOperator& op, long n) {
  std::vector<double> sv;
  detail::append_shell_singular_values(op, n, sv);
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

struct ShellStat {
  long n = 0;
  std::size_t count = 0;
  /// sum of sigma^p over the shell
  double sum = 0.0;
  /// largest singular value on the shell (operator norm of the shell block)
  double max = 0.0;
};

/// Shell-indexed sums of sigma^p with cumulative partials.
struct ShellSumSeries {
  double p = 1.0;
  std::vector<ShellStat> shells;
  std::vector<double> cumulative;
  double total() const noexcept { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

/// One pass over shells 0..N computing the series for every order in `ps`.
/// Shells may be evaluated concurrently; the cumulative sums are reduced in
/// ascending shell order, so results are bit-identical for any thread count.
inline std::vector<ShellSumSeries> schatten_series(const LatticeOperator& op, const std::vector<double>& ps, long max_degree,
                                                   std::size_t threads = thread_count()) {
  for (double p : ps)
    if (!(p > 0.0)) throw std::invalid_argument("Schatten order must be positive");
  if (max_degree < 0) throw std::invalid_argument("max degree must be nonnegative");
  struct PerShell {
    std::size_t count = 0;
    double max = 0.0;
    std::vector<double> sums;
  };
  auto per_shell = parallel_map<PerShell>(
      0, max_degree,
      [&](long n) {
        std::vector<double> sv;
        detail::append_shell_singular_values(op, n, sv);
        PerShell r;
        r.count = sv.size();
        for (double s : sv) r.max = std::max(r.max, s);
        r.sums.reserve(ps.size());
        for (double p : ps) {
          CompensatedSum acc;
          for (double s : sv)
            if (s > 0.0) acc.add(std::pow(s, p));
          r.sums.push_back(acc.value());
        }
        return r;
      },
      threads);
  std::vector<ShellSumSeries> out(ps.size());
  for (std::size_t q = 0; q < ps.size(); ++q) {
    auto& ser = out[q];
    ser.p = ps[q];
    CompensatedSum cum;
    for (long n = 0; n <= max_degree; ++n) {
      const auto& r = per_shell[static_cast<std::size_t>(n)];
      const double s = r.sums[q];
      if (!std::isfinite(s)) throw std::overflow_error("shell sum overflowed at shell " + std::to_string(n));
      cum.add(s);
      if (!std::isfinite(cum.value())) throw std::overflow_error("partial sum overflowed at shell " + std::to_string(n));
      ser.shells.push_back({n, r.count, s, r.max});
      ser.cumulative.push_back(cum.value());
    }
  }
  return out;
}

struct SchattenPartial {
  double value = 0.0;
  ShellSumSeries series;
};

/// Partial sum of sigma^p over shells 0..N.
inline SchattenPartial schatten_partial(const LatticeOperator& op, double p, long max_degree, std::size_t threads = thread_count()) {
  auto s = schatten_series(op, {p}, max_degree, threads);
  return {s.front().total(), std::move(s.front())};
}

/// Least-squares line through (log n, log value).
struct DecayFit {
  long lo = 0;
  long hi = 0;
  std::size_t used = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

class FiniteRankTail : public std::domain_error {
public:
  FiniteRankTail() : std::domain_error("finite-rank tail") {}
};

inline constexpr std::size_t kMinFitShells = 5;

namespace detail {

inline DecayFit loglog_fit(const std::vector<std::pair<double, double>>& pts, long lo, long hi) {
  DecayFit f;
  f.lo = lo;
  f.hi = hi;
  f.used = pts.size();
  if (pts.empty()) throw FiniteRankTail();
  if (pts.size() < kMinFitShells) throw std::domain_error("fewer than " + std::to_string(kMinFitShells) + " usable shells in window");
  double sx = 0, sy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const double k = static_cast<double>(pts.size());
  const double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (const auto& [x, y] : pts) {
    const double e = y - (f.intercept + f.slope * x);
    ss_res += e * e;
  }
  f.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

template <class Value>
DecayFit fit_shells(const ShellSumSeries& s, long lo, long hi, Value value) {
  if (lo < 1 || hi < lo) throw std::invalid_argument("fit window must satisfy 1 <= lo <= hi");
  if (s.shells.empty() || hi > s.shells.back().n) throw std::invalid_argument("fit window exceeds the computed shells");
  std::vector<std::pair<double, double>> pts;
  for (const auto& sh : s.shells) {
    if (sh.n < lo || sh.n > hi) continue;
    const double v = value(sh);
    if (v > 0.0) pts.emplace_back(std::log(static_cast<double>(sh.n)), std::log(v));
  }
  return loglog_fit(pts, lo, hi);
}

}  // namespace detail

/// Log-log slope of the shell sums over [lo, hi]; shells with zero sum are
/// skipped.  Throws FiniteRankTail when every shell in the window vanishes.
inline DecayFit fit_decay(const ShellSumSeries& s, long lo, long hi) {
  return detail::fit_shells(s, lo, hi, [](const ShellStat& sh) { return sh.sum; });
}

/// Log-log slope of the shell operator norms over [lo, hi].
inline DecayFit fit_norm_decay(const ShellSumSeries& s, long lo, long hi) {
  return detail::fit_shells(s, lo, hi, [](const ShellStat& sh) { return sh.max; });
}

/// Slopes modeled as s(p) = a - b p across several orders; p* solves s = -1.
struct CriticalExponent {
  double a = 0.0;
  double b = 0.0;
  double p_star = 0.0;
};

inline CriticalExponent fit_critical_exponent(const std::vector<std::pair<double, double>>& p_and_slope) {
  if (p_and_slope.size() < 3) throw std::invalid_argument("critical exponent needs at least 3 orders");
  double sp = 0, ss = 0;
  for (const auto& [p, s] : p_and_slope) {
    sp += p;
    ss += s;
  }
  const double k = static_cast<double>(p_and_slope.size());
  const double mp = sp / k, ms = ss / k;
  double spp = 0, sps = 0;
  for (const auto& [p, s] : p_and_slope) {
    spp += (p - mp) * (p - mp);
    sps += (p - mp) * (s - ms);
  }
  if (spp == 0) throw std::invalid_argument("critical exponent needs distinct orders");
  CriticalExponent c;
  c.b = -sps / spp;
  c.a = ms + c.b * mp;
  if (c.b == 0) throw std::domain_error("slopes do not depend on p");
  c.p_star = (c.a + 1.0) / c.b;
  return c;
}

enum class Verdict { converged, diverged, inconclusive };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::diverged: return "diverged";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

/// Worst of two verdicts: diverged > inconclusive > converged.
inline Verdict worst(Verdict a, Verdict b) {
  auto rank = [](Verdict v) { return v == Verdict::diverged ? 2 : v == Verdict::inconclusive ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

struct VerdictOptions {
  long max_degree = 600;
  double margin = 0.1;
  /// Fit window; defaults to [max(1, N/10), N].
  std::optional<std::pair<long, long>> window;
  std::size_t threads = thread_count();

  std::pair<long, long> resolved_window() const {
    if (window) return *window;
    return {std::max(1L, max_degree / 10), max_degree};
  }
};

/// Extrapolated compactness / Schatten-class verdict.  Compactness: the
/// shell operator norms decay (norm slope < -margin).  Schatten order p:
/// the shell sums have slope < -1 - margin (converged), >= -1 + margin
/// (diverged), or fall inside the band (inconclusive).  A window in which
/// every shell vanishes is a finite-rank tail and converges for every p.
struct CompactnessVerdict {
  Verdict verdict = Verdict::inconclusive;
  Verdict compactness = Verdict::inconclusive;
  std::optional<double> p;
  std::optional<Verdict> schatten;
  std::optional<DecayFit> norm_fit;
  std::optional<DecayFit> sum_fit;
  bool finite_rank = false;
  std::string note;
};

namespace detail {

inline CompactnessVerdict judge(const ShellSumSeries& s, std::optional<double> p, const VerdictOptions& o) {
  CompactnessVerdict v;
  v.p = p;
  const auto [lo, hi] = o.resolved_window();
  try {
    v.norm_fit = fit_norm_decay(s, lo, hi);
  } catch (const FiniteRankTail&) {
    v.finite_rank = true;
  } catch (const std::domain_error& e) {
    v.note = e.what();
  }
  if (v.finite_rank) {
    v.compactness = Verdict::converged;
    if (p) v.schatten = Verdict::converged;
    v.verdict = Verdict::converged;
    v.note = "finite-rank tail";
    return v;
  }
  if (!v.norm_fit) {
    v.verdict = Verdict::inconclusive;
    return v;
  }
  v.compactness = v.norm_fit->slope < -o.margin ? Verdict::converged : Verdict::diverged;
  if (p) {
    try {
      v.sum_fit = fit_decay(s, lo, hi);
      const double slope = v.sum_fit->slope;
      v.schatten = slope < -1.0 - o.margin ? Verdict::converged : slope >= -1.0 + o.margin ? Verdict::diverged : Verdict::inconclusive;
    } catch (const std::domain_error& e) {
      v.schatten = Verdict::inconclusive;
      v.note = e.what();
    }
  }
  if (v.compactness == Verdict::diverged) v.verdict = Verdict::diverged;
  else v.verdict = p ? *v.schatten : v.compactness;
  return v;
}

}  // namespace detail

/// Verdicts for several Schatten orders from a single shell pass.  An empty
/// `ps` yields one compactness-only verdict.
inline std::vector<CompactnessVerdict> verdicts(const LatticeOperator& op, const std::vector<double>& ps, const VerdictOptions& o = {}) {
  const std::vector<double> orders = ps.empty() ? std::vector<double>{1.0} : ps;
  const auto series = schatten_series(op, orders, o.max_degree, o.threads);
  std::vector<CompactnessVerdict> out;
  for (std::size_t q = 0; q < series.size(); ++q)
    out.push_back(detail::judge(series[q], ps.empty() ? std::nullopt : std::optional<double>(ps[q]), o));
  return out;
}

inline CompactnessVerdict verdict(const LatticeOperator& op, std::optional<double> p, const VerdictOptions& o = {}) {
  return verdicts(op, p ? std::vector<double>{*p} : std::vector<double>{}, o).front();
}

/// A verdict together with the label of the operator it was computed for.
struct OperatorVerdict {
  std::string op;
  CompactnessVerdict result;
};

enum class ConditionKind { star, star_star, star_star_p, star_star_sup };

inline std::string_view to_string(ConditionKind c) {
  switch (c) {
    case ConditionKind::star: return "star";
    case ConditionKind::star_star: return "star_star";
    case ConditionKind::star_star_p: return "star_star_p";
    case ConditionKind::star_star_sup: return "star_star_sup";
  }
  return "unknown";
}

struct ConditionParams {
  /// Order for star_star_p.
  double p = 3.0;
  /// star_star_sup tests q = (m - [i]) + offset on every slice.
  std::vector<double> q_offsets{0.5, 1.0};
  int level_cap = 2;
  std::size_t slice_budget = 64;
  long star_degree = 100;
  VerdictOptions options{};
};

struct ConditionEntry {
  std::string label;
  std::vector<AxisLevel> slice;
  std::optional<double> order;
  CompactnessVerdict result;
};

struct ConditionReport {
  ConditionKind kind = ConditionKind::star;
  bool holds = true;
  std::optional<WeightCheck> contractive;
  std::vector<ConditionEntry> entries;
  std::size_t slices_tested = 0;
};

namespace detail {

inline void all_commutators(const WeightSet& w, const Domain& d, const std::vector<double>& ps, const VerdictOptions& o,
                            const std::vector<AxisLevel>& slice, ConditionReport& rep) {
  const std::size_t m = w.dimension();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const auto op = commutator(w, i, j, d);
      const auto vs = verdicts(op, ps, o);
      for (std::size_t q = 0; q < vs.size(); ++q) {
        ConditionEntry e{op.label(), slice, ps.empty() ? std::nullopt : std::optional<double>(ps[q]), vs[q]};
        if (e.result.verdict != Verdict::converged) rep.holds = false;
        rep.entries.push_back(std::move(e));
      }
    }
}

}  // namespace detail

/// Numerical reading of the weight conditions: (*) on a truncation,
/// (**) as compactness of all m^2 commutators, (**)_p as membership in C_p,
/// and the slice-uniform variant over multi-slices up to a level cap, each
/// restricted module in m' = m - [i] variables tested at q = m' + offset.
inline ConditionReport check_condition(const WeightSet& w, ConditionKind kind, const ConditionParams& params = {}) {
  ConditionReport rep;
  rep.kind = kind;
  const std::size_t m = w.dimension();
  switch (kind) {
    case ConditionKind::star:
      rep.contractive = check_contractive(w, params.star_degree);
      rep.holds = rep.contractive->holds;
      break;
    case ConditionKind::star_star:
      detail::all_commutators(w, Domain::ambient(m), {}, params.options, {}, rep);
      break;
    case ConditionKind::star_star_p:
      detail::all_commutators(w, Domain::ambient(m), {params.p}, params.options, {}, rep);
      break;
    case ConditionKind::star_star_sup: {
      if (m > 20) throw std::invalid_argument("too many variables for the slice census");
      for (std::size_t size = 0; size < m; ++size)
        for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
          if (static_cast<std::size_t>(std::popcount(mask)) != size) continue;
          std::vector<std::size_t> axes;
          for (std::size_t i = 0; i < m; ++i)
            if (mask & (1u << i)) axes.push_back(i);
          std::vector<int> levels(axes.size(), 0);
          while (true) {
            if (rep.slices_tested >= params.slice_budget) return rep;
            std::vector<AxisLevel> slice;
            for (std::size_t t = 0; t < axes.size(); ++t) slice.push_back({axes[t], levels[t]});
            const WeightSet ws = w.restrict_to_slice(slice);
            const double mp = static_cast<double>(ws.dimension());
            std::vector<double> qs;
            for (double off : params.q_offsets) qs.push_back(std::max(1.0, mp + off));
            detail::all_commutators(ws, Domain::ambient(ws.dimension()), qs, params.options, slice, rep);
            ++rep.slices_tested;
            std::size_t t = 0;
            while (t < levels.size() && levels[t] == params.level_cap) levels[t++] = 0;
            if (t == levels.size()) break;
            ++levels[t];
          }
        }
      break;
    }
  }
  return rep;
}

}  // namespace essnorm
