#include "cryomap/threading.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace cryomap {

void parallel_for_chunks(std::size_t count, int n_threads,
                         const std::function<void(std::size_t, std::size_t, int)>& body) {
    if (count == 0) return;
    int workers = std::max(1, n_threads);
    workers = int(std::min<std::size_t>(workers, count));
    if (workers == 1) {
        body(0, count, 0);
        return;
    }
    const std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const std::size_t begin = std::size_t(w) * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end, w] { body(begin, end, w); });
    }
    for (std::thread& t : pool) t.join();
}

} // namespace cryomap
