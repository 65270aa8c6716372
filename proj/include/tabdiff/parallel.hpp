#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tabdiff {

// Execution mode for the data-parallel kernels. Every kernel has one code
// path; `parallel` only adds an OpenMP pragma over independent work items,
// and all floating-point reductions fold fixed-size chunks in a fixed
// order, so serial and parallel runs produce bit-identical results for any
// thread count.
enum class Exec { serial, parallel };

inline void set_max_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs body(i) for i in [0, n); iterations must be independent.
template <class F>
void for_each_index(std::size_t n, Exec exec, F&& body) {
#ifdef _OPENMP
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      body(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  (void)exec;
  for (std::size_t i = 0; i < n; ++i) body(i);
}

// Runs body(chunk_index, begin, end) over fixed-size chunks of [0, n).
// Chunk boundaries depend only on n and chunk_size, never on thread count.
template <class F>
void for_each_chunk(std::size_t n, std::size_t chunk_size, Exec exec, F&& body) {
  if (n == 0) return;
  const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
  for_each_index(n_chunks, exec, [&](std::size_t c) {
    const std::size_t begin = c * chunk_size;
    const std::size_t end = std::min(n, begin + chunk_size);
    body(c, begin, end);
  });
}

// Deterministic sum: partial_sum(begin, end) is computed serially per
// chunk, chunks may run in parallel, partials fold in chunk order.
template <class F>
double chunked_sum(std::size_t n, std::size_t chunk_size, Exec exec, F&& partial_sum) {
  if (n == 0) return 0.0;
  const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
  std::vector<double> partials(n_chunks, 0.0);
  for_each_chunk(n, chunk_size, exec, [&](std::size_t c, std::size_t begin, std::size_t end) {
    partials[c] = partial_sum(begin, end);
  });
  double total = 0.0;
  for (double p : partials) total += p;
  return total;
}

}  // namespace tabdiff
