#include "navlab/parallel.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace navlab {

void configure_threads_from_env() {
    const char* value = std::getenv("NAVLAB_THREADS");
    if (!value) {
        return;
    }
    char* end = nullptr;
    long threads = std::strtol(value, &end, 10);
    if (end == value || threads < 1) {
        return;
    }
#ifdef _OPENMP
    omp_set_num_threads(static_cast<int>(threads));
#endif
}

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}
