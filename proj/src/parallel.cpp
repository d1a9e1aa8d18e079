#include "mflab/parallel.hpp"

#include <cstdlib>

namespace mflab {

int default_thread_count() {
    if (const char* env = std::getenv("MFLAB_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

} // namespace mflab
