#pragma once

// Deterministic parallel reduction.  Terms are grouped into fixed-size blocks;
// each block is compensated-summed in index order and block results are
// combined in block order.  The grouping is independent of the worker count,
// so a sum is bit-identical whether it runs on 1 thread or 64.
//
// The COTYPE_LAB_THREADS environment variable caps the worker pool.

#include <array>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "cotype/numeric.hpp"

namespace cotype {

inline int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("COTYPE_LAB_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1 && cap < hw) hw = cap;
      if (cap >= 1 && cap >= hw) hw = cap;  // allow raising too; oversubscription is harmless
    } catch (...) {
      // unparsable value: ignore and use hardware count
    }
  }
  return hw;
}

inline constexpr std::size_t kSumBlock = 8192;

// K parallel accumulators over i in [0, count): term(i, cell) adds its
// contributions via cell[k].add(...).  The block size is a fixed parameter of
// the call site (never derived from the worker count), which is what makes
// the result reproducible across machines with different core counts.
template <std::size_t K, class Term>
std::array<double, K> deterministic_sums(std::size_t count, std::size_t block, Term&& term) {
  std::array<double, K> out{};
  if (count == 0) return out;
  if (block == 0) block = 1;
  const std::size_t nblocks = (count + block - 1) / block;

  std::vector<std::array<double, K>> partial(nblocks);
  auto run_block = [&](std::size_t b) {
    std::array<KahanSum, K> cell;
    const std::size_t lo = b * block;
    const std::size_t hi = std::min(count, lo + block);
    for (std::size_t i = lo; i < hi; ++i) term(i, cell);
    for (std::size_t k = 0; k < K; ++k) partial[b][k] = cell[k].value();
  };

  const int workers = worker_count();
  if (workers <= 1 || nblocks <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b) run_block(b);
  } else {
    std::atomic<std::size_t> next{0};
    auto body = [&] {
      for (;;) {
        const std::size_t b = next.fetch_add(1);
        if (b >= nblocks) break;
        run_block(b);
      }
    };
    std::vector<std::thread> pool;
    const std::size_t spawn = std::min<std::size_t>(static_cast<std::size_t>(workers), nblocks);
    pool.reserve(spawn);
    for (std::size_t t = 0; t + 1 < spawn; ++t) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();
  }

  std::array<KahanSum, K> total;
  for (const auto& row : partial) {
    for (std::size_t k = 0; k < K; ++k) total[k].add(row[k]);
  }
  for (std::size_t k = 0; k < K; ++k) out[k] = total[k].value();
  return out;
}

// Sum of term(i) for i in [0, count), deterministic per the scheme above.
template <class Term>
double deterministic_sum(std::size_t count, Term&& term) {
  return deterministic_sums<1>(count, kSumBlock, [&](std::size_t i, std::array<KahanSum, 1>& c) {
    c[0].add(term(i));
  })[0];
}

}  // namespace cotype
