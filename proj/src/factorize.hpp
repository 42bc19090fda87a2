#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "boolls.hpp"

namespace bmf {

enum class Backend { exact, greedy_ls };
enum class InitStrategy { random_columns, random_rows, nmf, alternate };

struct Factorization {
  BoolMatrix w;  // rows x rank
  BoolMatrix h;  // rank x cols
  std::uint64_t error = 0;
  // error trajectory: starts with [count of observed ones, that count - 1],
  // then one entry per accepted sweep; the last entry is the final error.
  std::vector<std::int64_t> trace;
  std::string method;
  std::uint64_t seed = 0;
  std::size_t sweeps = 0;  // accepted sweeps
};

struct InitConfig {
  InitStrategy strategy = InitStrategy::alternate;
  std::size_t nmf_iters = 200;
  // Fixes the NMF binarization threshold instead of drawing it from
  // [0.3, 0.7); intended for tests.
  std::optional<double> delta_override;
};

struct AOConfig {
  Backend backend = Backend::exact;
  std::size_t maxiter = 100;  // total sweeps attempted, accepted or not
  std::size_t exact_rank_limit = kDefaultExactRankLimit;
  LocalSearchParams ls;
};

struct MsConfig {
  AOConfig ao;
  InitConfig init;
  // Soft wall-clock budget: a run that has started always finishes. With
  // max_runs > 0 the count takes over (deterministic mode); both zero means
  // a single run.
  double budget_seconds = 0.0;
  std::size_t max_runs = 0;
};

struct MsStats {
  std::size_t runs = 0;
  std::uint64_t best_error = 0;
  double elapsed_seconds = 0.0;
};

// Builds a starting factor from `rank` distinct columns (or rows) of x,
// sampled without replacement. Returns rows x rank for columns, rank x cols
// for rows. Only meaningful for complete data.
BoolMatrix init_random_selection(const BoolMatrix& x, std::size_t rank, bool columns, Rng& rng);

// NMF-based starting pair: run mask-weighted NMF, balance each component's
// scale across the two factors, then threshold at a random delta in [0.3,0.7).
std::pair<BoolMatrix, BoolMatrix> init_nmf(const BoolMatrix& x, const BoolMatrix& mask,
                                           std::size_t rank, const InitConfig& cfg, Rng& rng);

// Alternating optimization from the starting factor w0: repeat
// columnwise-solve H, revive all-zero rows of H from uncovered residual rows,
// rowwise-solve W, and keep the sweep only while the error strictly drops.
// The first sweep always becomes the incumbent.
Factorization ao_bmf(const BoolMatrix& x, const BoolMatrix& mask, const BoolMatrix& w0, Rng& rng,
                     const AOConfig& cfg = {});

using RunObserver = std::function<void(const Factorization&, std::size_t run_index)>;

// Multi-start wrapper: repeat (init, ao_bmf) under the budget and keep the
// best run (earliest on ties). `on_run` sees every completed run in order.
Factorization ms_ao(const BoolMatrix& x, const BoolMatrix& mask, std::size_t rank, Rng& rng,
                    const MsConfig& cfg = {}, MsStats* stats = nullptr,
                    const RunObserver& on_run = nullptr);

}  // namespace bmf
