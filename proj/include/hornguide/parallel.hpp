#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hornguide {

// Worker-count control for the OpenMP kernels. 0 = library default.
void set_jobs(int jobs);
int effective_jobs();

// Data-parallel loop over [0, n). Every kernel built on this writes to
// per-index slots (or merges fixed-size chunks in index order), so the
// parallel path is bit-identical to the serial one; `parallel = false`
// is the serial reference used by the tests and the benchmark.
template <class F>
void parallel_for(std::size_t n, bool parallel, F&& body) {
#ifdef _OPENMP
    if (parallel && n > 1 && effective_jobs() > 1) {
        #pragma omp parallel for schedule(dynamic, 1)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            body(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    (void)parallel;
    for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace hornguide
