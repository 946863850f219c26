#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fpphe {

/// Runs body(state, i) for every trial index i in [0, trials), splitting the
/// range into contiguous blocks, one per worker. Each worker owns a state made
/// by make_state(). The first exception thrown by any worker is rethrown.
template <class MakeState, class Body>
void parallel_trials(std::uint64_t trials, int workers, MakeState make_state, Body body) {
  if (trials == 0) return;
  const auto count = static_cast<std::uint64_t>(std::max(1, workers));
  const std::uint64_t used = std::min<std::uint64_t>(count, trials);
  if (used == 1) {
    auto state = make_state();
    for (std::uint64_t i = 0; i < trials; ++i) body(state, i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (std::uint64_t w = 0; w < used; ++w) {
    const std::uint64_t begin = trials * w / used;
    const std::uint64_t end = trials * (w + 1) / used;
    pool.emplace_back([&, begin, end] {
      try {
        auto state = make_state();
        for (std::uint64_t i = begin; i < end; ++i) body(state, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fpphe
