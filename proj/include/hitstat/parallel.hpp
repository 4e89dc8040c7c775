#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hitstat {

inline unsigned default_workers() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

// Calls body(block_index, begin, end) for fixed blocks of [0, count). Block
// boundaries depend only on count and block_size, never on the worker
// count, so per-block results merged in block order are bit-stable.
// The first exception thrown by a block is rethrown on the caller.
template <class Body>
void parallel_blocks(std::size_t count, std::size_t block_size, unsigned workers,
                     Body&& body) {
  if (count == 0) return;
  block_size = std::max<std::size_t>(block_size, 1);
  const std::size_t blocks = (count + block_size - 1) / block_size;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(blocks)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      const std::size_t begin = b * block_size;
      const std::size_t end = std::min(count, begin + block_size);
      try {
        body(b, begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(blocks);
        return;
      }
    }
  };

  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

// Per-index variant: body(i) for every i in [0, count).
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  parallel_blocks(count, 256, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) body(i);
  });
}

}  // namespace hitstat
