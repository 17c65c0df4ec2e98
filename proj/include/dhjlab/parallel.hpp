#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace dhjlab {

/// Runs body(i) for i in [0, count) on up to threads workers. Each index is
/// handled exactly once; results must be written to per-index slots.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(count, threads < 1 ? 1 : static_cast<std::size_t>(threads));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace dhjlab
