#pragma once

#include <cstdint>
#include <vector>

#include "bitmatrix.hpp"
#include "rng.hpp"

namespace bmf {

struct BenchResult {
  std::size_t n = 0;
  std::size_t trials = 0;
  double packed_seconds = 0.0;  // mean per trial
  double naive_seconds = 0.0;   // mean per trial
  double speedup = 0.0;
  bool outputs_match = true;  // packed product bit-identical to the reference in every trial
};

// Times the packed Boolean product of two random n-by-n matrices against an
// unpacked one-byte-per-entry triple loop, and cross-checks the two outputs.
// Matrix entries are drawn by rounding uniform [0,1) samples.
BenchResult bench_bool_product(std::size_t n, std::size_t trials, Rng& rng);

}  // namespace bmf
