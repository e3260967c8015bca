#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace wpstack {

// Worker count from WPSTACK_WORKERS, else the hardware concurrency.
inline unsigned default_workers() {
  if (const char* env = std::getenv("WPSTACK_WORKERS")) {
    try {
      long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Splits [lo, hi] into fixed chunks (independent of the worker count), runs
// fn(chunk_lo, chunk_hi) -> Acc on each, and returns the results in chunk
// order. Exceptions from any chunk are rethrown on the caller's thread.
template <class Acc, class Fn>
std::vector<Acc> map_chunks(std::int64_t lo, std::int64_t hi, unsigned workers, Fn&& fn,
                            std::int64_t chunks_hint = 256) {
  if (hi < lo) return {};
  const std::int64_t span = hi - lo + 1;
  const std::int64_t n_chunks = std::min<std::int64_t>(span, std::max<std::int64_t>(1, chunks_hint));
  const std::int64_t step = (span + n_chunks - 1) / n_chunks;
  const std::int64_t real_chunks = (span + step - 1) / step;
  std::vector<Acc> results(static_cast<std::size_t>(real_chunks));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;

  auto worker = [&] {
    for (;;) {
      std::int64_t c = next.fetch_add(1);
      if (c >= real_chunks) return;
      const std::int64_t a = lo + c * step;
      const std::int64_t b = std::min(hi, a + step - 1);
      try {
        results[static_cast<std::size_t>(c)] = fn(a, b);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(real_chunks);
      }
    }
  };

  workers = std::max(1u, workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace wpstack
