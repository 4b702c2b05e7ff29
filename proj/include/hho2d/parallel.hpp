// Chunked parallel map over an index range. Work items must be independent;
// results go into pre-sized slots so the merge order (and hence the output)
// does not depend on the thread count.

#ifndef HHO2D_PARALLEL_HPP
#define HHO2D_PARALLEL_HPP

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace hho2d {

inline unsigned resolve_threads(unsigned requested) {
  if (requested == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
  }
  return requested;
}

template <typename Fn>
void parallel_for(int n, unsigned n_threads, Fn &&fn) {
  n_threads = resolve_threads(n_threads);
  if (n_threads <= 1 || n < 2) {
    for (int i = 0; i < n; i++) fn(i);
    return;
  }

  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const unsigned used = std::min<unsigned>(n_threads, static_cast<unsigned>(n));
  pool.reserve(used);
  for (unsigned t = 0; t < used; t++) {
    pool.emplace_back([&, t]() {
      try {
        for (int i = static_cast<int>(t); i < n; i += static_cast<int>(used)) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto &th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace hho2d

#endif
