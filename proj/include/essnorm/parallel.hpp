#pragma once

#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace essnorm {

/// Worker count: ESSNORM_THREADS when set to a positive integer, else the
/// hardware concurrency.
inline std::size_t thread_count() {
  if (const char* env = std::getenv("ESSNORM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// out[t] = f(lo + t) for t in [0, hi - lo], computed on `threads` workers
/// with an interleaved assignment.  Results land in index order, so any
/// reduction the caller runs over `out` is independent of the thread count.
template <class T, class F>
std::vector<T> parallel_map(long lo, long hi, F&& f, std::size_t threads = thread_count()) {
  std::vector<T> out(hi >= lo ? static_cast<std::size_t>(hi - lo + 1) : 0);
  if (out.empty()) return out;
  threads = std::max<std::size_t>(1, std::min(threads, out.size()));
  if (threads == 1) {
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = f(lo + static_cast<long>(t));
    return out;
  }
  std::vector<std::exception_ptr> errors(out.size());
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t t = w; t < out.size(); t += threads) {
        try {
          out[t] = f(lo + static_cast<long>(t));
        } catch (...) {
          errors[t] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace essnorm
