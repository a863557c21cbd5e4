#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

namespace efc {

enum class ExecPolicy {
  Serial,   // reference path, single thread, used by tests and the bench
  Parallel  // OpenMP worker pool, capped by EFC_THREADS when set
};

// Number of workers a Parallel region may use: OpenMP's max, clamped to the
// EFC_THREADS environment variable when present. Returns 1 when built
// without OpenMP.
int worker_count();

// Apply EFC_THREADS to the OpenMP runtime (call once at process start).
void apply_thread_cap();

// Deterministic parallel reduction: [begin, end) is cut into fixed chunks,
// partials land in per-chunk slots, and the slots are combined serially in
// index order. The result is bit-identical for any worker count, which the
// byte-stable output guarantee depends on. term(i) must be pure.
template <class Term>
double chunked_sum(std::uint64_t begin, std::uint64_t end, Term term,
                   ExecPolicy policy = ExecPolicy::Parallel) {
  if (end <= begin) return 0.0;
  const std::uint64_t count = end - begin;
  constexpr std::uint64_t kChunk = 1 << 14;
  const std::int64_t chunks = std::int64_t((count + kChunk - 1) / kChunk);
  std::vector<double> partial(std::size_t(chunks), 0.0);
  auto run_chunk = [&](std::int64_t c) {
    const std::uint64_t lo = begin + std::uint64_t(c) * kChunk;
    const std::uint64_t hi = std::min(end, lo + kChunk);
    double s = 0.0;
    for (std::uint64_t i = lo; i < hi; ++i) s += term(i);
    partial[std::size_t(c)] = s;
  };
  if (policy == ExecPolicy::Parallel && chunks > 1) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c);
  }
  return std::accumulate(partial.begin(), partial.end(), 0.0);
}

}  // namespace efc
