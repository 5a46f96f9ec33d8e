#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lossyhom {

// Runs body(i) for i in [0, n) on a small worker pool. Each index is handled
// by exactly one worker; callers write into per-index slots and reduce
// afterwards, so results do not depend on the thread count. The exception
// from the lowest failing index is rethrown.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(n, hw);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::mutex mtx;
  std::exception_ptr error;
  std::size_t error_index = n;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(mtx);
            if (i < error_index) {
              error_index = i;
              error = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace lossyhom
