#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace essnorm {

/// Maximum number of variables a MultiIndex can hold.  Entries live inline
/// so the shell loops (millions of points) never touch the heap.
inline constexpr std::size_t kMaxVars = 12;

/// A point of the nonnegative integer lattice A_m.
class MultiIndex {
public:
  MultiIndex() = default;

  explicit MultiIndex(std::size_t m) : size_(static_cast<std::uint8_t>(checked_size(m))) {}

  MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::span<const int>(entries.begin(), entries.size())) {}

  explicit MultiIndex(std::span<const int> entries) : size_(static_cast<std::uint8_t>(checked_size(entries.size()))) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i] < 0) throw std::invalid_argument("multi-index entries must be nonnegative");
      data_[i] = entries[i];
    }
  }

  static MultiIndex zero(std::size_t m) { return MultiIndex(m); }

  static MultiIndex unit(std::size_t m, std::size_t axis) {
    MultiIndex e(m);
    e.data_.at(axis) = 1;
    return e;
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  int operator[](std::size_t i) const noexcept {
    assert(i < size_);
    return data_[i];
  }
  int& operator[](std::size_t i) noexcept {
    assert(i < size_);
    return data_[i];
  }

  const int* begin() const noexcept { return data_.data(); }
  const int* end() const noexcept { return data_.data() + size_; }
  std::span<const int> entries() const noexcept { return {data_.data(), size_}; }

  long degree() const noexcept { return std::accumulate(begin(), end(), 0L); }

  /// Componentwise order: *this <= other iff every entry is <=.
  bool divides(const MultiIndex& other) const noexcept {
    assert(size_ == other.size_);
    for (std::size_t i = 0; i < size_; ++i)
      if (data_[i] > other.data_[i]) return false;
    return true;
  }

  MultiIndex plus_unit(std::size_t axis) const noexcept {
    MultiIndex r = *this;
    ++r.data_[axis];
    return r;
  }

  /// Valid only when entry `axis` is positive.
  MultiIndex minus_unit(std::size_t axis) const noexcept {
    assert(data_[axis] > 0);
    MultiIndex r = *this;
    --r.data_[axis];
    return r;
  }

  /// Translate by an integer displacement; false when the result leaves A_m.
  bool shifted(std::span<const int> delta, MultiIndex& out) const noexcept {
    out = *this;
    for (std::size_t i = 0; i < size_; ++i) {
      const int v = data_[i] + delta[i];
      if (v < 0) return false;
      out.data_[i] = v;
    }
    return true;
  }

  /// Drop coordinate `axis` (identifies a slice with A_{m-1}).
  MultiIndex without(std::size_t axis) const {
    assert(axis < size_);
    MultiIndex r(size_ - 1);
    for (std::size_t i = 0, j = 0; i < size_; ++i)
      if (i != axis) r.data_[j++] = data_[i];
    return r;
  }

  /// Insert `value` at coordinate `axis` (inverse of without).
  MultiIndex with(std::size_t axis, int value) const {
    assert(axis <= size_);
    MultiIndex r(size_ + 1u);
    for (std::size_t i = 0, j = 0; i < r.size_; ++i) r.data_[i] = (i == axis) ? value : data_[j++];
    return r;
  }

  std::vector<int> to_vector() const { return {begin(), end()}; }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) noexcept {
    return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
  }

  /// Lexicographic on entries; the fixed enumeration order of the library.
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) noexcept {
    if (a.size_ != b.size_) return a.size_ <=> b.size_;
    for (std::size_t i = 0; i < a.size_; ++i)
      if (a.data_[i] != b.data_[i]) return a.data_[i] <=> b.data_[i];
    return std::strong_ordering::equal;
  }

  friend std::ostream& operator<<(std::ostream& os, const MultiIndex& a) {
    os << '(';
    for (std::size_t i = 0; i < a.size_; ++i) os << (i ? "," : "") << a.data_[i];
    return os << ')';
  }

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < size_; ++i) {
      if (i) s += ',';
      s += std::to_string(data_[i]);
    }
    return s + ')';
  }

private:
  static std::size_t checked_size(std::size_t m) {
    if (m > kMaxVars) throw std::invalid_argument("at most " + std::to_string(kMaxVars) + " variables are supported");
    return m;
  }

  std::array<int, kMaxVars> data_{};
  std::uint8_t size_ = 0;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& a) const noexcept {
    std::size_t h = a.size();
    for (int v : a) h = h * 1000003u ^ static_cast<std::size_t>(v);
    return h;
  }
};

/// Number of points of A_m of degree n: C(n+m-1, m-1).
inline std::uint64_t shell_size(std::size_t m, long n) {
  if (n < 0) return 0;
  if (m == 0) return n == 0 ? 1 : 0;
  // C(n+m-1, m-1), multiplicative form keeps intermediates exact.
  std::uint64_t r = 1;
  for (std::size_t j = 1; j < m; ++j) r = r * static_cast<std::uint64_t>(n + static_cast<long>(j)) / j;
  return r;
}

/// Visit every point of A_m with |alpha| = n in lexicographic order.  The
/// callback may return void, or bool where false stops the enumeration.
template <class F>
bool for_each_in_shell(std::size_t m, long n, F&& f) {
  auto visit = [&f](const MultiIndex& a) -> bool {
    if constexpr (std::is_same_v<decltype(f(a)), bool>) return f(a);
    else {
      f(a);
      return true;
    }
  };
  if (n < 0) return true;
  MultiIndex a(m);
  if (m == 0) return n == 0 ? visit(a) : true;
  a[m - 1] = static_cast<int>(n);
  while (true) {
    if (!visit(a)) return false;
    // Rightmost j < m-1 whose tail sum is positive gets incremented.
    long tail = a[m - 1];
    std::size_t j = m - 1;
    while (true) {
      if (j == 0) return true;
      --j;
      if (tail > 0) break;
      tail += a[j];
    }
    ++a[j];
    for (std::size_t i = j + 1; i + 1 < m; ++i) a[i] = 0;
    a[m - 1] = static_cast<int>(tail - 1);
  }
}

/// Visit every point of the box [lo, hi] (componentwise) in lex order.
template <class F>
void for_each_in_box(const MultiIndex& lo, const MultiIndex& hi, F&& f) {
  const std::size_t m = lo.size();
  for (std::size_t i = 0; i < m; ++i)
    if (lo[i] > hi[i]) return;
  MultiIndex a = lo;
  while (true) {
    f(a);
    std::size_t i = m;
    bool advanced = false;
    while (i > 0 && !advanced) {
      --i;
      if (a[i] < hi[i]) {
        ++a[i];
        for (std::size_t j = i + 1; j < m; ++j) a[j] = lo[j];
        advanced = true;
      }
    }
    if (!advanced) return;
  }
}

}  // namespace essnorm
