#include "biortheq/parallel.hpp"

#include "biortheq/error.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace biortheq {

namespace {
std::atomic<unsigned> g_threads{1};
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::structural: return "structural error";
    case ErrorKind::numerical: return "numerical error";
    case ErrorKind::resource: return "resource error";
    case ErrorKind::precondition: return "precondition violation";
    case ErrorKind::no_convergence: return "no convergence";
  }
  return "error";
}

void set_thread_count(unsigned n) { g_threads.store(std::max(1u, n)); }

unsigned thread_count() { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t t = 0; t < workers; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace biortheq
