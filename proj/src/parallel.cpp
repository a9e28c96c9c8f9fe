#include "anderson/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace anderson {

namespace {
std::atomic<int> g_workers{1};
thread_local bool t_inside = false;  // nested regions run inline

struct InsideGuard {
  bool saved = t_inside;
  InsideGuard() { t_inside = true; }
  ~InsideGuard() { t_inside = saved; }
};
}

void set_workers(int n) { g_workers.store(std::max(1, n)); }

int workers() { return g_workers.load(); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers()), count);
  if (nthreads <= 1 || t_inside) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    InsideGuard guard;
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(nthreads - 1);
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace anderson
