#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace trim_mpc::detail {

/// Worker count: explicit request, else TRIM_MPC_THREADS, else hardware concurrency.
inline unsigned resolve_threads(unsigned requested)
{
  if (requested > 0) { return requested; }
  if (const char * env = std::getenv("TRIM_MPC_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) { return static_cast<unsigned>(v); }
    } catch (const std::exception &) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * Evaluates fn(i) for i in [0, n) on up to `threads` workers. Results are
 * stored by index, so the output does not depend on scheduling.
 */
template<typename Result, typename Fn>
std::vector<Result> parallel_map(std::size_t n, unsigned threads, Fn && fn)
{
  std::vector<Result> out(n);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) { out[i] = fn(i); }
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) { error = std::current_exception(); }
        }
      }
    });
  }
  for (auto & t : pool) { t.join(); }
  if (error) { std::rethrow_exception(error); }
  return out;
}

}  // namespace trim_mpc::detail
