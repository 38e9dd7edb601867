#include "core/parallel.hpp"

#include <atomic>
#include <exception>
#include <thread>

namespace mmt {

namespace {
std::atomic<int> g_threads{0};

int effective_threads() {
  int n = g_threads.load(std::memory_order_relaxed);
  if (n <= 0) n = int(std::thread::hardware_concurrency());
  return n > 0 ? n : 1;
}
}  // namespace

void set_thread_count(int n) { g_threads.store(n, std::memory_order_relaxed); }

int thread_count() { return effective_threads(); }

void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& body, int64_t grain) {
  if (n <= 0) return;
  if (grain < 1) grain = 1;
  const int64_t chunks = (n + grain - 1) / grain;
  const int workers = int(std::min<int64_t>(effective_threads(), chunks));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  // Worker exceptions are parked per chunk and the lowest-chunk one is
  // rethrown after the join, so failures are as deterministic as results.
  std::vector<std::exception_ptr> errors(static_cast<size_t>(chunks));
  std::atomic<int64_t> next{0};
  auto run = [&] {
    for (;;) {
      int64_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= chunks) return;
      int64_t begin = c * grain;
      try {
        body(begin, std::min(begin + grain, n));
      } catch (...) {
        errors[size_t(c)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(size_t(workers - 1));
  for (int i = 1; i < workers; ++i) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double parallel_sum(int64_t n, const std::function<double(int64_t, int64_t)>& chunk_sum,
                    int64_t grain) {
  if (n <= 0) return 0.0;
  if (grain < 1) grain = 1;
  const int64_t chunks = (n + grain - 1) / grain;
  std::vector<double> partial(size_t(chunks), 0.0);
  parallel_for(
      chunks,
      [&](int64_t cb, int64_t ce) {
        for (int64_t c = cb; c < ce; ++c) {
          int64_t begin = c * grain;
          partial[size_t(c)] = chunk_sum(begin, std::min(begin + grain, n));
        }
      },
      1);
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace mmt
