#include "bench.hpp"

#include <chrono>
#include <stdexcept>

namespace bmf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Deliberately plain reference: one byte per entry, textbook i/j/k loops, no
// early exit once an AND fires. This is the baseline the packed kernel is
// compared against, so it must stay unclever.
std::vector<std::uint8_t> naive_product(const std::vector<std::uint8_t>& w,
                                        const std::vector<std::uint8_t>& h, std::size_t n) {
  std::vector<std::uint8_t> out(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::uint8_t acc = 0;
      for (std::size_t k = 0; k < n; ++k) acc |= static_cast<std::uint8_t>(w[i * n + k] & h[k * n + j]);
      out[i * n + j] = acc;
    }
  return out;
}

}  // namespace

BenchResult bench_bool_product(std::size_t n, std::size_t trials, Rng& rng) {
  if (n == 0 || trials == 0) throw std::invalid_argument("bench_bool_product: n and trials must be positive");
  BenchResult res;
  res.n = n;
  res.trials = trials;

  double packed_total = 0.0, naive_total = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<std::uint8_t> wb(n * n), hb(n * n);
    for (auto& v : wb) v = rng.real01() >= 0.5 ? 1 : 0;
    for (auto& v : hb) v = rng.real01() >= 0.5 ? 1 : 0;

    BoolMatrix w(n, n), h(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (wb[i * n + j]) w.set(i, j);
        if (hb[i * n + j]) h.set(i, j);
      }

    auto t0 = Clock::now();
    BoolMatrix packed = bool_product(w, h);
    packed_total += seconds_since(t0);

    t0 = Clock::now();
    std::vector<std::uint8_t> naive = naive_product(wb, hb, n);
    naive_total += seconds_since(t0);

    for (std::size_t i = 0; i < n && res.outputs_match; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (packed.get(i, j) != static_cast<bool>(naive[i * n + j])) {
          res.outputs_match = false;
          break;
        }
  }

  res.packed_seconds = packed_total / static_cast<double>(trials);
  res.naive_seconds = naive_total / static_cast<double>(trials);
  res.speedup = res.packed_seconds > 0.0 ? res.naive_seconds / res.packed_seconds : 0.0;
  return res;
}

}  // namespace bmf
