#ifndef navlab_parallel_hpp
#define navlab_parallel_hpp

#include <cstddef>

namespace navlab {

/// Applies NAVLAB_THREADS (if set and positive) as the OpenMP thread cap.
void configure_threads_from_env();

/// Threads available to parallel loops (1 without OpenMP).
int thread_count();

}

#endif /* navlab_parallel_hpp */
