#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "essnorm/lattice.hpp"
#include "essnorm/multi_index.hpp"

namespace essnorm {

enum class WeightFamily { drury_arveson, factorial_ratio, hardy_ball_like, bergman_ball_like, unweighted, custom };

inline std::string_view to_string(WeightFamily f) {
  switch (f) {
    case WeightFamily::drury_arveson: return "drury_arveson";
    case WeightFamily::factorial_ratio: return "factorial_ratio";
    case WeightFamily::hardy_ball_like: return "hardy_ball_like";
    case WeightFamily::bergman_ball_like: return "bergman_ball_like";
    case WeightFamily::unweighted: return "unweighted";
    case WeightFamily::custom: return "custom";
  }
  return "unknown";
}

inline WeightFamily parse_family(std::string_view s) {
  for (auto f : {WeightFamily::drury_arveson, WeightFamily::factorial_ratio, WeightFamily::hardy_ball_like,
                 WeightFamily::bergman_ball_like, WeightFamily::unweighted, WeightFamily::custom})
    if (to_string(f) == s) return f;
  throw std::invalid_argument("unknown weight family '" + std::string(s) + "'");
}

/// How a custom table answers for indices it does not list.
enum class ExtendPolicy { error, product_extend };

class WeightUndefined : public std::out_of_range {
public:
  explicit WeightUndefined(const MultiIndex& a) : std::out_of_range("weight undefined at " + a.str()) {}
};

namespace detail {

/// The weight model in its own (base) coordinates.
class WeightModel {
public:
  WeightModel(WeightFamily family, std::size_t m) : family_(family), m_(m) {
    switch (family) {
      case WeightFamily::drury_arveson:
        half_ = true;
        ratio_offset_ = 1.0;
        break;
      case WeightFamily::factorial_ratio:
        half_ = false;
        ratio_offset_ = 1.0;
        break;
      case WeightFamily::hardy_ball_like:
        half_ = true;
        ratio_offset_ = static_cast<double>(m);
        log_norm_ = std::lgamma(static_cast<double>(m));
        break;
      case WeightFamily::bergman_ball_like:
        half_ = true;
        ratio_offset_ = static_cast<double>(m) + 1.0;
        log_norm_ = std::lgamma(static_cast<double>(m) + 1.0);
        break;
      case WeightFamily::unweighted:
      case WeightFamily::custom: break;
    }
  }

  WeightModel(std::size_t m, std::map<MultiIndex, double> table, ExtendPolicy extend)
      : family_(WeightFamily::custom), m_(m), extend_(extend) {
    if (m == 0 && table.empty()) throw std::invalid_argument("custom weight table is empty");
    table_box_ = MultiIndex(m);
    for (const auto& [a, lam] : table) {
      if (a.size() != m) throw std::invalid_argument("custom weight index " + a.str() + " has wrong dimension");
      if (!(lam > 0.0) || !std::isfinite(lam))
        throw std::invalid_argument("custom weight at " + a.str() + " must be positive and finite");
      log_table_.emplace(a, std::log(lam));
      for (std::size_t i = 0; i < m; ++i) table_box_[i] = std::max(table_box_[i], a[i]);
    }
  }

  WeightFamily family() const noexcept { return family_; }
  std::size_t dimension() const noexcept { return m_; }
  ExtendPolicy extend() const noexcept { return extend_; }
  const std::map<MultiIndex, double>& log_table() const noexcept { return log_table_; }

  double log_lambda(const MultiIndex& a) const {
    switch (family_) {
      case WeightFamily::unweighted: return 0.0;
      case WeightFamily::custom: return custom_log_lambda(a);
      default: break;
    }
    double s = log_norm_;
    for (int v : a) s += std::lgamma(v + 1.0);
    s -= std::lgamma(static_cast<double>(a.degree()) + ratio_offset_);
    return half_ ? 0.5 * s : s;
  }

  /// log(lambda_{a+e_i} / lambda_a).  For the factorial families the
  /// log-gamma terms cancel to log(a_i + 1) - log(|a| + offset).
  double log_ratio(std::size_t i, const MultiIndex& a) const {
    switch (family_) {
      case WeightFamily::unweighted: return 0.0;
      case WeightFamily::custom: return custom_log_lambda(a.plus_unit(i)) - custom_log_lambda(a);
      default: break;
    }
    const double s = std::log(a[i] + 1.0) - std::log(static_cast<double>(a.degree()) + ratio_offset_);
    return half_ ? 0.5 * s : s;
  }

private:
  double custom_log_lambda(const MultiIndex& a) const {
    if (auto it = log_table_.find(a); it != log_table_.end()) return it->second;
    if (extend_ == ExtendPolicy::error) throw WeightUndefined(a);
    // Clamp into the table's bounding box and continue each overflowing
    // axis with the ratio frozen at the box boundary.
    MultiIndex c = a;
    for (std::size_t i = 0; i < m_; ++i) c[i] = std::min(c[i], table_box_[i]);
    const auto base = log_table_.find(c);
    if (base == log_table_.end()) throw WeightUndefined(a);
    double s = base->second;
    for (std::size_t i = 0; i < m_; ++i) {
      const int excess = a[i] - c[i];
      if (excess == 0 || c[i] == 0) continue;
      const auto prev = log_table_.find(c.minus_unit(i));
      if (prev == log_table_.end()) throw WeightUndefined(a);
      s += excess * (base->second - prev->second);
    }
    return s;
  }

  WeightFamily family_;
  std::size_t m_;
  bool half_ = true;
  double ratio_offset_ = 1.0;
  double log_norm_ = 0.0;
  ExtendPolicy extend_ = ExtendPolicy::error;
  std::map<MultiIndex, double> log_table_;
  MultiIndex table_box_;
};

}  // namespace detail

/// The weights lambda_alpha = ||z^alpha|| of a module M_Lambda, possibly
/// restricted to a multi-slice of a larger lattice (the restricted weight
/// sets used by the slice reductions).
class WeightSet {
public:
  WeightSet() = default;

  WeightSet(WeightFamily family, std::size_t m) {
    if (family == WeightFamily::custom) throw std::invalid_argument("custom weights need a table");
    init(std::make_shared<const detail::WeightModel>(family, m));
  }

  static WeightSet drury_arveson(std::size_t m) { return {WeightFamily::drury_arveson, m}; }
  static WeightSet unweighted(std::size_t m) { return {WeightFamily::unweighted, m}; }

  static WeightSet custom(std::size_t m, const std::map<MultiIndex, double>& table, ExtendPolicy extend) {
    WeightSet w;
    w.init(std::make_shared<const detail::WeightModel>(m, table, extend));
    return w;
  }

  std::size_t dimension() const noexcept { return free_axes_.size(); }
  WeightFamily family() const noexcept { return model_->family(); }
  const detail::WeightModel& model() const noexcept { return *model_; }
  bool is_restricted() const noexcept { return free_axes_.size() != model_->dimension(); }
  /// Fixed coordinates of the embedding, in base coordinates.
  std::vector<AxisLevel> fixed_axes() const {
    std::vector<AxisLevel> out;
    std::vector<bool> is_free(model_->dimension(), false);
    for (auto a : free_axes_) is_free[a] = true;
    for (std::size_t i = 0; i < is_free.size(); ++i)
      if (!is_free[i]) out.push_back({i, base_point_[i]});
    return out;
  }

  double log_lambda(const MultiIndex& a) const { return model_->log_lambda(embed(a)); }
  double lambda(const MultiIndex& a) const { return std::exp(log_lambda(a)); }

  /// Step ratio w_i(alpha) = lambda_{alpha+e_i} / lambda_alpha.
  double ratio(std::size_t i, const MultiIndex& a) const {
    check(a);
    if (i >= dimension()) throw std::invalid_argument("axis out of range");
    return std::exp(model_->log_ratio(free_axes_[i], embed(a)));
  }

  /// The weight set of the slice {alpha_axis = level} viewed over A_{m-1}.
  WeightSet restrict_to_slice(std::size_t axis, int level) const {
    if (axis >= dimension()) throw std::invalid_argument("slice axis out of range");
    WeightSet r = *this;
    r.base_point_[free_axes_[axis]] += level;
    r.free_axes_.erase(r.free_axes_.begin() + static_cast<std::ptrdiff_t>(axis));
    return r;
  }

  WeightSet restrict_to_slice(std::vector<AxisLevel> fixed) const {
    std::sort(fixed.begin(), fixed.end(), [](const AxisLevel& x, const AxisLevel& y) { return x.axis > y.axis; });
    WeightSet r = *this;
    for (const auto& f : fixed) r = r.restrict_to_slice(f.axis, f.level);
    return r;
  }

  MultiIndex embed(const MultiIndex& a) const {
    MultiIndex b = base_point_;
    for (std::size_t t = 0; t < free_axes_.size(); ++t) b[free_axes_[t]] += a[t];
    return b;
  }

private:
  void init(std::shared_ptr<const detail::WeightModel> model) {
    model_ = std::move(model);
    base_point_ = MultiIndex(model_->dimension());
    free_axes_.resize(model_->dimension());
    for (std::size_t i = 0; i < free_axes_.size(); ++i) free_axes_[i] = i;
  }

  void check(const MultiIndex& a) const {
    if (a.size() != dimension()) throw std::invalid_argument("index " + a.str() + " has wrong dimension");
  }

  std::shared_ptr<const detail::WeightModel> model_;
  MultiIndex base_point_;
  std::vector<std::size_t> free_axes_;
};

struct WeightCheck {
  bool holds = true;
  std::optional<MultiIndex> witness;
  std::optional<std::size_t> axis;
  /// Largest tested value (max ratio, or max spherical sum).
  double worst = 0.0;
};

inline constexpr double kConditionTolerance = 1e-12;

/// Condition (*): every step ratio is at most 1 up to degree N.  Returns the
/// first lexicographic witness on failure.
inline WeightCheck check_contractive(const WeightSet& w, long max_degree) {
  WeightCheck r;
  const std::size_t m = w.dimension();
  for (long n = 0; n <= max_degree && r.holds; ++n)
    for_each_in_shell(m, n, [&](const MultiIndex& a) {
      for (std::size_t i = 0; i < m; ++i) {
        const double v = w.ratio(i, a);
        r.worst = std::max(r.worst, v);
        if (v > 1.0 + kConditionTolerance) {
          r.holds = false;
          r.witness = a;
          r.axis = i;
          return false;
        }
      }
      return true;
    });
  return r;
}

/// Spherical contraction: sum_i Z_i^* Z_i is diagonal with entry
/// sum_i w_i(alpha)^2, checked against 1 up to degree N.
inline WeightCheck check_spherical(const WeightSet& w, long max_degree) {
  WeightCheck r;
  const std::size_t m = w.dimension();
  for (long n = 0; n <= max_degree && r.holds; ++n)
    for_each_in_shell(m, n, [&](const MultiIndex& a) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double v = w.ratio(i, a);
        s += v * v;
      }
      r.worst = std::max(r.worst, s);
      if (s > 1.0 + kConditionTolerance) {
        r.holds = false;
        r.witness = a;
        return false;
      }
      return true;
    });
  return r;
}

}  // namespace essnorm
