#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

#include "msqaoa/finite_n.hpp"

namespace msqaoa::detail {

BigInt exact_binomial(long long n, long long k);
/// sum_{|S|=q} z_S for a string with `plus` entries equal to +1 out of n.
BigInt elementary_sum(int q, int plus, int n);
/// 4 sum_{k odd} C(t,k) C(n-t,q-k).
BigInt disagreement_square_sum(int q, int t, int n);

/// Runs body(block) for block in [0, blocks) on up to `threads` workers. Callers write
/// per-block results and combine them in block order, so the rounding does not depend
/// on the worker count.
template <typename Body>
void parallel_blocks(int blocks, int threads, Body&& body) {
  threads = std::max(1, std::min(threads, blocks));
  if (threads == 1) {
    for (int b = 0; b < blocks; ++b) body(b);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) body(b);
    });
  for (auto& th : pool) th.join();
}

/// Neumaier-compensated accumulator.
template <typename T>
class CompensatedSum {
 public:
  void add(T x) {
    const T t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  T value() const { return sum_ + comp_; }

 private:
  T sum_{};
  T comp_{};
};

struct CompensatedComplex {
  CompensatedSum<double> re, im;
  void add(std::complex<double> z) {
    re.add(z.real());
    im.add(z.imag());
  }
  void add(const CompensatedComplex& o) {
    re.add(o.re);
    im.add(o.im);
  }
  std::complex<double> value() const { return {re.value(), im.value()}; }
};

}  // namespace msqaoa::detail
