#pragma once

#include <Eigen/Core>

#include "bitmatrix.hpp"
#include "rng.hpp"

namespace bmf {

struct NmfFactors {
  Eigen::MatrixXd w;  // rows x rank
  Eigen::MatrixXd h;  // rank x cols
};

// Mask-weighted NMF of the 0/1 matrix x via multiplicative updates on
// ||mask .* (x - w h)||_F^2. Entries of w and h start uniform in [0,1).
// Only used to seed the Boolean solvers, so a fixed iteration count is fine.
NmfFactors weighted_nmf(const BoolMatrix& x, const BoolMatrix& mask, std::size_t rank,
                        std::size_t iters, Rng& rng);

}  // namespace bmf
