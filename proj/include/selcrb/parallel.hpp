#pragma once

// Fixed batching for Monte-Carlo loops. Trials are cut into contiguous
// batches whose boundaries depend only on the trial count, each batch is
// processed by exactly one worker, and callers reduce per-batch results in
// batch order. Results therefore never depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace selcrb {

inline constexpr std::size_t kMcBatches = 100;

struct BatchRange {
  std::size_t index;
  std::size_t begin;
  std::size_t end;
};

inline std::vector<BatchRange> make_batches(std::size_t trials, std::size_t batches = kMcBatches) {
  batches = std::max<std::size_t>(1, std::min(batches, trials));
  std::vector<BatchRange> out(batches);
  for (std::size_t b = 0; b < batches; ++b)
    out[b] = {b, trials * b / batches, trials * (b + 1) / batches};
  return out;
}

/// 0 means one worker per hardware thread.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0)
    return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs f(batch) for every batch. The exception of the lowest-indexed
/// failing batch is rethrown after all workers finish.
template <class F>
void for_each_batch(const std::vector<BatchRange>& batches, unsigned threads, F&& f) {
  const unsigned workers =
      std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(batches.size()));
  std::vector<std::exception_ptr> errors(batches.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < batches.size(); i = next++) {
      try {
        f(batches[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back(work);
    for (auto& t : pool)
      t.join();
  }
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

} // namespace selcrb
