#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

namespace specprec {

template <typename T>
std::vector<T> run_trials(Index count, unsigned jobs, const std::function<T(Index)>& fn) {
  std::vector<std::optional<T>> slots(static_cast<std::size_t>(count));
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, unsigned(std::max<Index>(count, 1))));
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        slots[std::size_t(i)].emplace(fn(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<T> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace specprec
