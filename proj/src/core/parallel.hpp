#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace mmt {

/// Worker count used by parallel_for. 0 restores the hardware default.
void set_thread_count(int n);
int thread_count();

/// Runs body(begin, end) over disjoint chunks of [0, n). Chunk boundaries are
/// fixed by `grain` alone, never by the worker count, so any per-element or
/// per-chunk output is bit-identical from 1 thread to N.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& body,
                  int64_t grain = 1024);

/// Deterministic sum reduction: partials are accumulated per fixed-size chunk
/// and combined in chunk order on the calling thread.
double parallel_sum(int64_t n, const std::function<double(int64_t, int64_t)>& chunk_sum,
                    int64_t grain = 4096);

}  // namespace mmt
