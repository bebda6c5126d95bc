#pragma once

// Replicate fan-out. Replicate k always gets seed derive_seed(base, k) and its
// result lands in slot k, so results do not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hgt/rng.hpp"

namespace hgt {

inline unsigned default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

template <class T>
struct ReplicateResults {
  std::vector<std::optional<T>> values;
  std::vector<std::size_t> failed;
  std::vector<std::string> errors;

  bool ok() const noexcept { return failed.empty(); }
};

/// Runs fn(index, seed) for index in [0, count) on `threads` workers.
/// Exceptions are caught per replicate and reported by index.
template <class T, class Fn>
ReplicateResults<T> run_replicates(std::size_t count, std::uint64_t base_seed, unsigned threads, Fn&& fn) {
  ReplicateResults<T> out;
  out.values.resize(count);
  std::vector<std::string> error(count);
  std::vector<char> bad(count, 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= count) return;
      try {
        out.values[k] = fn(k, derive_seed(base_seed, k));
      } catch (const std::exception& e) {
        bad[k] = 1;
        error[k] = e.what();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t k = 0; k < count; ++k)
    if (bad[k]) out.failed.push_back(k), out.errors.push_back(error[k]);
  return out;
}

}  // namespace hgt
