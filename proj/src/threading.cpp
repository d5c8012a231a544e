#include "recap/threading.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace recap {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RECAP_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hardware = std::thread::hardware_concurrency();
  return hardware > 0 ? static_cast<int>(hardware) : 1;
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count == 1) {
    fn(0, count);
    return;
  }
  const std::size_t n_chunks = std::min(workers, count);
  const std::size_t chunk = (count + n_chunks - 1) / n_chunks;
  std::vector<std::thread> pool;
  pool.reserve(n_chunks);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, &first_error, &error_mutex, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& worker : pool) worker.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace recap
