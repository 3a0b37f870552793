#pragma once

#include "ubiq/types.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace ubiq {

// Runs fn(row_begin, row_end) over disjoint row blocks. Each row is handled by exactly one
// worker, so per-pixel results do not depend on the worker count.
template <typename Fn>
void for_each_row_block(Index rows, Fn&& fn) {
    const auto workers = static_cast<Index>(std::min<std::size_t>(worker_count(), 64));
    if (workers <= 1 || rows < 2 * workers) {
        fn(Index{0}, rows);
        return;
    }
    const Index block = (rows + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (Index begin = 0; begin < rows; begin += block) {
        const Index end = std::min(rows, begin + block);
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
}

}  // namespace ubiq
