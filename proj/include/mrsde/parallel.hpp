#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

#include "mrsde/types.hpp"

namespace mrsde {

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to
/// `workers` threads. Chunks never share output indices, so results are
/// independent of the worker count as long as body writes per index.
template <typename Body>
void parallel_for(int workers, Index n, Body&& body) {
  const Index w = std::clamp<Index>(workers, 1, std::max<Index>(n, 1));
  if (w == 1) {
    body(Index{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(w));
  for (Index t = 0; t < w; ++t) {
    const Index begin = n * t / w;
    const Index end = n * (t + 1) / w;
    threads.emplace_back([&, t, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mrsde
