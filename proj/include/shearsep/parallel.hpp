#pragma once

// Trial-parallel execution with a reduction order fixed by trial index, so
// results do not depend on the number of workers.

#include <cstdint>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include <omp.h>

namespace shearsep::parallel {

/// Worker count: `requested` if positive, else the OpenMP default; capped
/// by the SHEARSEP_THREADS environment variable when set.
inline int resolve_threads(int requested = 0) {
  int n = requested > 0 ? requested : omp_get_max_threads();
  if (const char* cap = std::getenv("SHEARSEP_THREADS")) {
    const int c = std::atoi(cap);
    if (c > 0 && c < n) n = c;
  }
  return n < 1 ? 1 : n;
}

/// results[i] = f(i) for 0 <= i < count, evaluated on `threads` workers.
template <class R, class F>
std::vector<R> map_trials(std::int64_t count, int threads, F&& f) {
  std::vector<R> out(static_cast<std::size_t>(count));
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = f(i);
  return out;
}

/// Serial reference for map_trials.
template <class R, class F>
std::vector<R> map_trials_serial(std::int64_t count, F&& f) {
  std::vector<R> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) out.push_back(f(i));
  return out;
}

/// Pairwise tree reduction over [lo, hi) in index order.
template <class R, class Combine>
R tree_reduce(const std::vector<R>& items, std::size_t lo, std::size_t hi, Combine&& combine) {
  if (hi - lo == 1) return items[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return combine(tree_reduce(items, lo, mid, combine), tree_reduce(items, mid, hi, combine));
}

template <class R, class Combine>
R tree_reduce(const std::vector<R>& items, R identity, Combine&& combine) {
  if (items.empty()) return identity;
  return tree_reduce(items, 0, items.size(), combine);
}

/// Count, sum and sum of squares; combined by the tree reduction.
struct Moments {
  double count = 0.0;
  double sum = 0.0;
  double sumsq = 0.0;

  static Moments of(double x) { return {1.0, x, x * x}; }
  friend Moments operator+(const Moments& a, const Moments& b) {
    return {a.count + b.count, a.sum + b.sum, a.sumsq + b.sumsq};
  }
  double mean() const { return count > 0.0 ? sum / count : 0.0; }
  /// Standard error of the mean (sample variance with n - 1).
  double stderr_mean() const;
};

inline double Moments::stderr_mean() const {
  if (count < 2.0) return 0.0;
  const double m = mean();
  double var = (sumsq - count * m * m) / (count - 1.0);
  if (var < 0.0) var = 0.0;
  return std::sqrt(var / count);
}

}  // namespace shearsep::parallel
