#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mardpg {

// Every data-parallel kernel (per-episode gradients, per-session evaluation)
// has a serial reference path; the parallel path computes the same per-index
// results into preallocated slots and reduces them in index order, so both
// modes are bit-identical regardless of thread count.
enum class ExecMode { serial, parallel };

template <typename Fn>
void parallel_for(int n, ExecMode mode, Fn&& fn) {
#ifdef _OPENMP
    if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
#else
    (void)mode;
#endif
    for (int i = 0; i < n; ++i) fn(i);
}

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace mardpg
