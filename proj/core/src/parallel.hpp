#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace sia::detail {

/// Splits [0, n) into `workers` contiguous chunks and runs fn(begin, end, k)
/// for chunk k. Chunk k always covers the same range for fixed (n, workers),
/// so per-chunk partials reduced in chunk order are reproducible.
template <class Fn>
void for_each_chunk(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    fn(std::size_t{0}, n, 0u);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t base = n / workers;
  const std::size_t extra = n % workers;
  std::size_t begin = 0;
  std::size_t first_end = 0;
  for (unsigned k = 0; k < workers; ++k) {
    const std::size_t end = begin + base + (k < extra ? 1 : 0);
    if (k == 0) {
      first_end = end;
    } else {
      pool.emplace_back([&fn, begin, end, k] { fn(begin, end, k); });
    }
    begin = end;
  }
  fn(std::size_t{0}, first_end, 0u);
}

}  // namespace sia::detail
