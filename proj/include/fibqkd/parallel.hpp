#ifndef FIBQKD_PARALLEL_HPP
#define FIBQKD_PARALLEL_HPP

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace fibqkd {

/// Splits [0, count) into contiguous blocks, runs fn(begin, end, acc) for each
/// block on its own thread and merges the per-block accumulators in block
/// order. With an associative merge the result does not depend on jobs.
template <class Acc, class Fn, class Merge>
Acc parallel_reduce(std::uint64_t count, unsigned jobs, Fn fn, Merge merge) {
  jobs = std::max(1U, jobs);
  const std::uint64_t blocks = std::min<std::uint64_t>(jobs, std::max<std::uint64_t>(count, 1));
  std::vector<Acc> partial(blocks);
  std::vector<std::exception_ptr> errors(blocks);
  auto run = [&](std::uint64_t b) {
    const std::uint64_t lo = count * b / blocks;
    const std::uint64_t hi = count * (b + 1) / blocks;
    try {
      fn(lo, hi, partial[b]);
    } catch (...) {
      errors[b] = std::current_exception();
    }
  };
  if (blocks == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (std::uint64_t b = 0; b < blocks; ++b) threads.emplace_back(run, b);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  Acc total{};
  for (auto& p : partial) merge(total, p);
  return total;
}

} // namespace fibqkd

#endif // FIBQKD_PARALLEL_HPP
