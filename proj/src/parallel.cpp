#include "hornguide/parallel.hpp"

namespace hornguide {

namespace {
int g_jobs = 0;
}

void set_jobs(int jobs) {
    g_jobs = jobs;
#ifdef _OPENMP
    if (jobs > 0) omp_set_num_threads(jobs);
#endif
}

int effective_jobs() {
#ifdef _OPENMP
    return g_jobs > 0 ? g_jobs : omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace hornguide
