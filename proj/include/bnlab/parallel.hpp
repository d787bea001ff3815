#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace bnlab::parallel {

// Deterministic block map-reduce.
//
// The index range [0, count) is cut into fixed-size blocks.  Workers claim
// blocks through an atomic counter and write each block's partial result
// into a slot addressed by block index; the slots are folded in block order
// after all workers join.  The fold order therefore depends only on
// (count, block_size), never on thread count or scheduling, which keeps
// floating-point reductions bit-identical across reruns.
//
// `map_block(begin, end, acc)` must accumulate indices [begin, end) into
// `acc` sequentially.

template <class Acc, class MapBlock, class Fold>
Acc block_reduce(std::size_t count, std::size_t block_size, int threads,
                 const Acc& zero, MapBlock&& map_block, Fold&& fold) {
    if (count == 0) return zero;
    if (block_size == 0) block_size = 1;
    const std::size_t n_blocks = (count + block_size - 1) / block_size;
    std::vector<Acc> slots(n_blocks, zero);

    auto worker_loop = [&](std::atomic<std::size_t>& next) {
        for (;;) {
            const std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
            if (b >= n_blocks) return;
            const std::size_t begin = b * block_size;
            const std::size_t end = std::min(begin + block_size, count);
            map_block(begin, end, slots[b]);
        }
    };

    if (threads <= 1 || n_blocks == 1) {
        std::atomic<std::size_t> next{0};
        worker_loop(next);
    } else {
        const int n_workers = static_cast<int>(
            std::min<std::size_t>(static_cast<std::size_t>(threads), n_blocks));
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int t = 0; t < n_workers; ++t) pool.emplace_back([&] { worker_loop(next); });
        for (auto& th : pool) th.join();
    }

    Acc acc = zero;
    for (std::size_t b = 0; b < n_blocks; ++b) fold(acc, slots[b]);
    return acc;
}

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace bnlab::parallel
