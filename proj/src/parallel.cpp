#include "texsplat/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace texsplat {

namespace {
std::atomic<int> g_default_threads{0};
}

int resolve_thread_count(std::optional<int> requested) {
  if (requested && *requested > 0) {
    return *requested;
  }
  if (const char* env = std::getenv("TEXSPLAT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) {
        return n;
      }
    } catch (const std::exception&) {
      // fall through to hardware default
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_thread_count(int threads) { g_default_threads = std::max(1, threads); }

int default_thread_count() {
  const int n = g_default_threads.load();
  return n > 0 ? n : resolve_thread_count();
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads) {
  if (threads <= 0) {
    threads = default_thread_count();
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) {
        return;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next = count;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    pool.emplace_back(run);
  }
  run();
  pool.clear();
  if (failure) {
    std::rethrow_exception(failure);
  }
}

} // namespace texsplat
