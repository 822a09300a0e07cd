#include "sqgforge/threading.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sqgforge {

namespace {
int g_threads = 1;
}

int thread_count() { return g_threads; }

void set_thread_count(int n) {
    g_threads = n < 1 ? 1 : n;
#ifdef _OPENMP
    omp_set_num_threads(g_threads);
#endif
}

int thread_count_from_env(int fallback) {
    const char* env = std::getenv("SQGFORGE_THREADS");
    if (env == nullptr) return fallback;
    try {
        int n = std::stoi(env);
        return n >= 1 ? n : fallback;
    } catch (...) {
        return fallback;
    }
}

}  // namespace sqgforge
