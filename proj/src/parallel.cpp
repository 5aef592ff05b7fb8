#include "netmanip/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace netmanip {

int worker_count() {
  const char* env = std::getenv("NETMANIP_THREADS");
  if (env == nullptr) return 1;
  int requested = 0;
  try {
    requested = std::stoi(env);
  } catch (const std::exception&) {
    return 1;
  }
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  return std::max(1, std::min(requested, hw));
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const int workers = worker_count();
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  const std::size_t spawn = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  pool.reserve(spawn);
  for (std::size_t w = 0; w < spawn; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace netmanip
