#include "efc/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace efc {

namespace {

int env_thread_cap() {
  const char* v = std::getenv("EFC_THREADS");
  if (!v || !*v) return 0;
  try {
    int n = std::stoi(v);
    return n > 0 ? n : 0;
  } catch (...) {
    return 0;
  }
}

}  // namespace

int worker_count() {
#ifdef _OPENMP
  int n = omp_get_max_threads();
  if (int cap = env_thread_cap(); cap > 0 && cap < n) n = cap;
  return n;
#else
  return 1;
#endif
}

void apply_thread_cap() {
#ifdef _OPENMP
  if (int cap = env_thread_cap(); cap > 0) omp_set_num_threads(cap);
#endif
}

}  // namespace efc
