#pragma once

#include <omp.h>

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdlib>
#include <string>

namespace nlslab {

/// Worker count for data-parallel kernels. NLSLAB_THREADS caps it; otherwise
/// the OpenMP default is used.
inline int thread_count() {
  static const int count = [] {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("NLSLAB_THREADS")) {
      try {
        int cap = std::stoi(env);
        if (cap > 0) n = std::min(n, cap);
      } catch (...) {
      }
    }
    return std::max(n, 1);
  }();
  return count;
}

template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

namespace detail {
// Fixed chunking makes every reduction independent of the thread count, so
// diagnostics are bitwise reproducible.
inline constexpr std::size_t kReduceChunks = 64;
}  // namespace detail

/// Deterministic sum of `term(i)` over [0, n) for K simultaneous accumulators.
template <std::size_t K, class Term>
std::array<double, K> reduce_sum(std::size_t n, Term&& term) {
  constexpr std::size_t chunks = detail::kReduceChunks;
  std::array<std::array<double, K>, chunks> partial{};
  const std::size_t width = (n + chunks - 1) / chunks;
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long long c = 0; c < static_cast<long long>(chunks); ++c) {
    std::array<double, K> acc{};
    const std::size_t begin = static_cast<std::size_t>(c) * width;
    const std::size_t end = std::min(n, begin + width);
    for (std::size_t i = begin; i < end; ++i) {
      const std::array<double, K> t = term(i);
      for (std::size_t k = 0; k < K; ++k) acc[k] += t[k];
    }
    partial[static_cast<std::size_t>(c)] = acc;
  }
  std::array<double, K> total{};
  for (const auto& p : partial)
    for (std::size_t k = 0; k < K; ++k) total[k] += p[k];
  return total;
}

template <class Term>
double reduce_sum(std::size_t n, Term&& term) {
  return reduce_sum<1>(n, [&](std::size_t i) { return std::array<double, 1>{term(i)}; })[0];
}

}  // namespace nlslab
