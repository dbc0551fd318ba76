#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <thread>
#include <vector>

namespace liouville {

// log(1 + x) for complex x, principal branch, accurate for tiny |x| where
// forming 1 + x first would round away the information.
inline std::complex<double> log1p_c(std::complex<double> x) {
  double m = std::abs(x);
  if (m >= 0.03125) return std::log(std::complex<double>{1.0, 0.0} + x);
  // |x| < 2^-5: a 12 term alternating series reaches full double precision.
  std::complex<double> acc{1.0 / 12.0, 0.0};
  for (int k = 11; k >= 1; --k)
    acc = 1.0 / static_cast<double>(k) - x * acc;
  return x * acc;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit fit_line(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

// C^2 ramp: 0 for x <= 0, 1 for x >= 1, quintic in between.
inline double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

namespace detail {
inline int& thread_count_ref() {
  static int count = 1;
  return count;
}
}  // namespace detail

inline void set_thread_count(int n) {
  detail::thread_count_ref() = n < 1 ? 1 : n;
}

inline int thread_count() { return detail::thread_count_ref(); }

// Runs fn(i) for i in [0, n). Work is split into contiguous index ranges, so
// callers that write results into per-index slots and reduce in index order
// get identical results for every thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  int workers = thread_count();
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t chunk = (n + workers - 1) / static_cast<std::size_t>(workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    std::size_t lo = static_cast<std::size_t>(w) * chunk;
    if (lo >= n) break;
    std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace liouville
