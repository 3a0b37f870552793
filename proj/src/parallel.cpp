#include "ubiq/types.hpp"

#include <cstdlib>
#include <string>
#include <thread>

namespace ubiq {

std::size_t worker_count() {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const char* env = std::getenv("UBIQ_THREADS");
    if (env == nullptr || *env == '\0') return hw;
    char* end = nullptr;
    const unsigned long requested = std::strtoul(env, &end, 10);
    if (end == env || requested == 0) return hw;
    return static_cast<std::size_t>(requested);
}

}  // namespace ubiq
