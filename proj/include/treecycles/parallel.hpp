#pragma once

// Deterministic parallel reduction over trial indices. Trials are split into
// fixed-size chunks independent of the worker count; each chunk produces a
// partial result and the partials are merged in chunk order, so the output
// is bit-identical for any number of workers.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace treecycles {

inline constexpr std::uint64_t kChunkSize = 1024;

/// Worker count used when a caller passes 0.
int default_workers();
void set_default_workers(int workers);

/// Runs body(partial, trial) for every trial in [0, trials) and merges the
/// per-chunk partials in chunk order with Partial::merge. If any trial
/// throws, the exception of the lowest failing chunk is rethrown.
template <typename Partial, typename Body>
Partial run_trials(std::uint64_t trials, int workers, Body body) {
  if (workers <= 0) workers = default_workers();
  const std::uint64_t chunks = (trials + kChunkSize - 1) / kChunkSize;
  std::vector<Partial> partials(chunks);
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (;;) {
      std::uint64_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        std::uint64_t end = std::min(trials, (c + 1) * kChunkSize);
        for (std::uint64_t i = c * kChunkSize; i < end; ++i) body(partials[c], i);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  auto count = static_cast<std::uint64_t>(workers);
  if (count <= 1 || chunks <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::uint64_t w = 0; w < std::min(count, chunks); ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  Partial out{};
  for (std::uint64_t c = 0; c < chunks; ++c) {
    if (errors[c]) std::rethrow_exception(errors[c]);
    out.merge(partials[c]);
  }
  return out;
}

}  // namespace treecycles
