#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace blockshrink {

inline int default_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Deterministic replicate-parallel accumulation.
//
// The replicate range is cut into fixed-size blocks; workers grab blocks in
// any order, but each block's partial sums are computed sequentially within
// the block, stored per block, and merged in block-index order with Kahan
// compensation afterwards.  The result is therefore a pure function of
// (reps, width, body), independent of the worker count and scheduling.
//
// `body(rep, acc)` must add replicate `rep`'s contribution to `acc`
// (a vector of length `width`).  Replicate-local randomness should come from
// split_stream(root, rep) so the sum is reproducible.
inline Eigen::VectorXd mc_accumulate(
    std::int64_t reps, int threads, int width,
    const std::function<void(std::int64_t, Eigen::VectorXd&)>& body) {
  constexpr std::int64_t kBlock = 4096;
  const std::int64_t nblocks = (reps + kBlock - 1) / kBlock;
  std::vector<Eigen::VectorXd> partial(static_cast<std::size_t>(nblocks));

  threads = static_cast<int>(
      std::max<std::int64_t>(1, std::min<std::int64_t>(threads, nblocks)));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    try {
      for (;;) {
        const std::int64_t b = next.fetch_add(1);
        if (b >= nblocks) break;
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(width);
        const std::int64_t lo = b * kBlock;
        const std::int64_t hi = std::min(reps, lo + kBlock);
        for (std::int64_t r = lo; r < hi; ++r) body(r, acc);
        partial[static_cast<std::size_t>(b)] = std::move(acc);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Sequential compensated merge in block order.
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(width);
  Eigen::VectorXd comp = Eigen::VectorXd::Zero(width);
  for (std::int64_t b = 0; b < nblocks; ++b) {
    const Eigen::VectorXd& x = partial[static_cast<std::size_t>(b)];
    for (int k = 0; k < width; ++k) {
      const double y = x[k] - comp[k];
      const double t = sum[k] + y;
      comp[k] = (t - sum[k]) - y;
      sum[k] = t;
    }
  }
  return sum;
}

}  // namespace blockshrink
