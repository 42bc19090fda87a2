#include "nmf.hpp"

#include <stdexcept>

namespace bmf {

NmfFactors weighted_nmf(const BoolMatrix& x, const BoolMatrix& mask, std::size_t rank,
                        std::size_t iters, Rng& rng) {
  if (rank == 0) throw std::invalid_argument("weighted_nmf: rank must be positive");
  if (x.rows() != mask.rows() || x.cols() != mask.cols())
    throw std::invalid_argument("weighted_nmf: mask shape mismatch");

  const Eigen::Index m = static_cast<Eigen::Index>(x.rows());
  const Eigen::Index n = static_cast<Eigen::Index>(x.cols());
  const Eigen::Index r = static_cast<Eigen::Index>(rank);

  Eigen::MatrixXd M(m, n);
  Eigen::MatrixXd MX(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double obs = mask.get(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) ? 1.0 : 0.0;
      M(i, j) = obs;
      MX(i, j) = obs * (x.get(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) ? 1.0 : 0.0);
    }

  // Row-major draw order so a given seed produces the same factors on any
  // platform regardless of Eigen's storage layout.
  Eigen::MatrixXd W(m, r), H(r, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index k = 0; k < r; ++k) W(i, k) = rng.real01();
  for (Eigen::Index k = 0; k < r; ++k)
    for (Eigen::Index j = 0; j < n; ++j) H(k, j) = rng.real01();

  const double eps = 1e-9;
  for (std::size_t it = 0; it < iters; ++it) {
    Eigen::MatrixXd MWH = M.cwiseProduct(W * H);
    H.array() *= (W.transpose() * MX).array() / ((W.transpose() * MWH).array() + eps);
    MWH = M.cwiseProduct(W * H);
    W.array() *= (MX * H.transpose()).array() / ((MWH * H.transpose()).array() + eps);
  }

  return {std::move(W), std::move(H)};
}

}  // namespace bmf
