#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <utility>
#include <vector>

namespace klsum {

// Deterministic chunked map: [0,n) is cut into fixed-size chunks, workers
// claim chunks through an atomic counter, and results land in a vector
// indexed by chunk id.  Callers fold the vector in index order, so the
// combined result is bit-identical for every thread count.  fn must be a
// pure function of (lo, hi).
template <class R, class F>
std::vector<R> chunked_map(std::uint64_t n, std::uint64_t chunk, int threads, F&& fn) {
  if (chunk == 0) chunk = 1;
  const std::uint64_t nchunks = n == 0 ? 0 : (n + chunk - 1) / chunk;
  std::vector<R> out(nchunks);
  auto run_chunk = [&](std::uint64_t idx) {
    const std::uint64_t lo = idx * chunk;
    const std::uint64_t hi = lo + chunk < n ? lo + chunk : n;
    out[idx] = fn(lo, hi);
  };
  if (threads <= 1 || nchunks <= 1) {
    for (std::uint64_t i = 0; i < nchunks; ++i) run_chunk(i);
    return out;
  }
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t idx = next.fetch_add(1);
      if (idx >= nchunks) return;
      run_chunk(idx);
    }
  };
  const unsigned nt =
      static_cast<unsigned>(std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), nchunks));
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace klsum
