#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lotecon {

// Thread-count knob; a no-op without OpenMP.
inline void set_thread_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

// Parallel map over [0, n). Each index must be computed independently of
// the others so results do not depend on the thread count. Reductions are
// the caller's job: write partials indexed by i and combine serially.
template <class F>
inline void parallel_for(std::int64_t n, F&& f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) f(i);
}

} // namespace lotecon
