#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace skillscope {

// Fixed block count, independent of thread availability: per-block partial
// results merged in block order give the same floating point sums no matter
// how many workers ran.
constexpr std::size_t kEStepBlocks = 16;

inline std::pair<std::size_t, std::size_t> block_range(std::size_t n, std::size_t block, std::size_t blocks) {
    return {n * block / blocks, n * (block + 1) / blocks};
}

// Executes fn(block) for block = 0..blocks-1 on up to `threads` workers.
// Each block runs on exactly one worker.
inline void run_blocks(std::size_t blocks, int threads,
                       const std::function<void(std::size_t)>& fn) {
    if (threads <= 0) {
        unsigned hc = std::thread::hardware_concurrency();
        threads = hc == 0 ? 1 : static_cast<int>(hc);
    }
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), blocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) fn(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            std::size_t b = next.fetch_add(1);
            if (b >= blocks) return;
            try {
                fn(b);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace skillscope
