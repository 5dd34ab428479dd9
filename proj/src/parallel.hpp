#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace critperc::detail {

inline unsigned resolve_workers(unsigned requested) {
  if (requested) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, n) into contiguous chunks, runs `fn(begin, end, counts)` on
/// each, and sums the per-chunk integer counters. Integer addition is exact,
/// so the result does not depend on how many workers ran.
template <class Fn>
std::vector<std::uint64_t> parallel_count(std::uint64_t n, unsigned workers, std::size_t width, Fn fn) {
  const unsigned w = static_cast<unsigned>(std::min<std::uint64_t>(resolve_workers(workers), std::max<std::uint64_t>(n, 1)));
  std::vector<std::vector<std::uint64_t>> partial(w, std::vector<std::uint64_t>(width, 0));
  if (w == 1) {
    fn(std::uint64_t{0}, n, partial[0]);
    return partial[0];
  }
  std::vector<std::jthread> threads;
  threads.reserve(w);
  for (unsigned k = 0; k < w; ++k) {
    const std::uint64_t begin = n * k / w, end = n * (k + 1) / w;
    threads.emplace_back([&, k, begin, end] { fn(begin, end, partial[k]); });
  }
  threads.clear();
  std::vector<std::uint64_t> total(width, 0);
  for (const auto& part : partial)
    for (std::size_t i = 0; i < width; ++i) total[i] += part[i];
  return total;
}

}  // namespace critperc::detail
