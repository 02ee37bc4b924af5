#ifndef OSI_RANDOM_HPP
#define OSI_RANDOM_HPP

// Seeding contract
// ----------------
// Every stochastic routine is driven by std::mt19937_64. Work is split into
// tasks identified by small integer coordinates (cell, replication, chunk);
// each task seeds its own generator with derive_seed(master, coords...).
// derive_seed folds the coordinates into the master seed through the
// SplitMix64 finalizer, so streams depend only on (master, coords) and never
// on thread count or scheduling order.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <initializer_list>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace osi {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = splitmix64(master);
  for (auto c : coords) h = splitmix64(h ^ splitmix64(c + 0x632BE59BD9B4E019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> coords) {
  return Rng(derive_seed(master, coords));
}

/// Worker count: OSI_THREADS if set and positive, else hardware concurrency.
inline unsigned default_threads() {
  if (const char* env = std::getenv("OSI_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1U : hc;
}

namespace detail {
inline unsigned& thread_override() {
  static unsigned value = 0;
  return value;
}
} // namespace detail

/// Process-wide override used by the CLI --threads flag (0 = use default).
inline void set_thread_count(unsigned n) { detail::thread_override() = n; }

inline unsigned thread_count() {
  unsigned o = detail::thread_override();
  return o > 0 ? o : default_threads();
}

/// Runs body(i) for i in [0, count). Tasks are statically interleaved over
/// workers; body must only write to slots owned by index i.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace osi

#endif // OSI_RANDOM_HPP
