#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace lslp {

/// Runs fn(i) for i in [0, count) on `workers` threads with static
/// contiguous chunks. Callers only write to slot i, so results do not depend
/// on the worker count. The first exception thrown by any worker is
/// rethrown on the calling thread.
inline void parallel_for(std::size_t count, std::size_t workers,
                         const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  if (workers > count) workers = count;
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = count * w / workers;
      const std::size_t end = count * (w + 1) / workers;
      threads.emplace_back([&, w, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

}  // namespace lslp
