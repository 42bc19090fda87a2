#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "factorize.hpp"

namespace bmf {

constexpr std::size_t kDefaultVecCacheBudget = 64ull << 20;  // bytes of flattened factors
constexpr std::size_t kDefaultExactCombineLimit = 25;
constexpr std::uint64_t kDefaultSubsetCap = 2'000'000;

// One rank-one piece of a factorization: a column of W and the matching row
// of H. `source` records which gathered run produced it.
struct RankOneFactor {
  BitVec w;  // length rows
  BitVec h;  // length cols
  std::size_t source = 0;
};

// Append-only pool of rank-one factors, deduplicated by content. A factor
// whose column or row is all-zero contributes nothing, so it is canonicalized
// to the all-zero pair before deduplication. Flattened m*n-bit forms of the
// factors are cached on demand up to a byte budget.
class FactorPool {
 public:
  FactorPool(std::size_t rows, std::size_t cols,
             std::size_t cache_budget_bytes = kDefaultVecCacheBudget);

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::size_t size() const { return fs_.size(); }
  const RankOneFactor& factor(std::size_t i) const { return fs_[i]; }

  // Returns the index of the factor, inserting it if it is new.
  std::size_t add(BitVec w, BitVec h, std::size_t source);

  // Adds every rank-one piece of a factorization; returns their pool indices
  // with duplicates collapsed, in first-seen order.
  std::vector<std::size_t> add_factorization(const Factorization& f, std::size_t source);

  // Flattened outer product w h^T as an m*n-bit vector (row-major), or
  // nullptr if building it would exceed the cache budget.
  const BitVec* flattened(std::size_t i) const;

 private:
  std::size_t m_, n_;
  std::size_t cache_budget_;
  mutable std::size_t cache_used_ = 0;
  std::vector<RankOneFactor> fs_;
  mutable std::vector<std::optional<BitVec>> flat_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

struct CombineSelection {
  std::vector<std::size_t> indices;  // distinct pool indices
  std::uint64_t error = 0;
};

struct HeurCombParams {
  std::size_t t_max = 100;      // stop after this many accepted improvements
  std::size_t n_trials = 1000;  // stop after this many consecutive rejected trials
  double budget_seconds = 0.0;  // optional wall-clock cap; 0 disables it
};

// Evaluates the masked error of pool subsets, via the flattened forms when
// the cache budget allows and row by row otherwise. Both paths count the
// same mismatches.
class SelectionEvaluator {
 public:
  SelectionEvaluator(const BoolMatrix& x, const BoolMatrix& mask, const FactorPool& pool);
  std::uint64_t error(const std::vector<std::size_t>& sel) const;
  std::uint64_t error_swap(const std::vector<std::size_t>& sel, std::size_t slot,
                           std::size_t replacement) const;
  std::uint64_t error_extend(const std::vector<std::size_t>& sel, std::size_t extra) const;

 private:
  std::uint64_t rowwise(const std::vector<std::size_t>& sel) const;

  const BoolMatrix& x_;
  const BoolMatrix& mask_;
  const FactorPool& pool_;
  bool use_flat_ = false;
  BitVec flat_x_, flat_mask_;
  mutable BitVec acc_;
  mutable BitVec row_acc_;
  mutable std::vector<std::size_t> scratch_;
};

// Best subset of min(rank, pool.size()) factors by branch and bound over the
// pool in index order (best-first on a coverage lower bound). Requires
// pool.size() <= exact_limit or C(pool.size(), rank) <= subset_cap; throws
// capability_error otherwise, or when materializing the pool would need an
// unreasonable amount of memory.
CombineSelection combine_exact(const BoolMatrix& x, const BoolMatrix& mask, const FactorPool& pool,
                               std::size_t rank,
                               std::size_t exact_limit = kDefaultExactCombineLimit,
                               std::uint64_t subset_cap = kDefaultSubsetCap);

// Random swap search from `start`: replace a uniformly chosen selected slot
// by a uniformly chosen outside factor, keeping strict improvements. Stops
// after t_max accepted moves or n_trials consecutive rejections.
CombineSelection combine_heuristic(const BoolMatrix& x, const BoolMatrix& mask,
                                   const FactorPool& pool, std::size_t rank,
                                   CombineSelection start, Rng& rng,
                                   const HeurCombParams& params = {});

// Extends `base` to min(rank, pool.size()) indices by repeatedly appending
// the factor with the lowest resulting error (lowest index on ties).
CombineSelection greedy_forward_selection(const BoolMatrix& x, const BoolMatrix& mask,
                                          const FactorPool& pool, std::size_t rank,
                                          std::vector<std::size_t> base = {});

// Turns a selection back into rank-many factors, padding with zero factors
// when the selection is shorter than rank.
Factorization rebuild(const BoolMatrix& x, const BoolMatrix& mask, const FactorPool& pool,
                      const CombineSelection& sel, std::size_t rank);

struct CombineStats {
  std::size_t runs = 0;
  std::size_t pool_size = 0;
  std::uint64_t best_gathered_error = 0;
  std::uint64_t combined_error = 0;
  std::uint64_t final_error = 0;
  bool used_exact_combine = false;
  double elapsed_seconds = 0.0;
};

struct MsCombConfig {
  MsConfig ms;  // ms.budget_seconds is the total budget; 3/4 goes to gathering
  HeurCombParams heur;
  std::size_t exact_combine_limit = kDefaultExactCombineLimit;
  std::uint64_t subset_cap = kDefaultSubsetCap;
};

// Gather runs, pool every rank-one factor seen, pick the best subset
// (exactly when feasible, by swap search otherwise), then polish the
// recombined factors with another AO pass. The result never loses to the
// best gathered run.
Factorization ms_comb_ao(const BoolMatrix& x, const BoolMatrix& mask, std::size_t rank, Rng& rng,
                         const MsCombConfig& cfg = {}, CombineStats* stats = nullptr,
                         FactorPool* pool_out = nullptr);

struct TreeConfig {
  std::size_t depth = 1;     // leaf level; 0 would be a bare ms_comb_ao
  std::size_t children = 2;  // children per internal node
  std::size_t leaf_solutions = 5;
  MsCombConfig node;  // node.ms.budget_seconds is the root budget, halved per level
};

// Hierarchical variant: leaves run ms_comb_ao, internal nodes pool their
// children's factors and recombine; only the root polishes. Each node's
// budget is the root budget divided by 2^level.
Factorization tree_bmf(const BoolMatrix& x, const BoolMatrix& mask, std::size_t rank,
                       std::uint64_t seed, const TreeConfig& cfg = {},
                       CombineStats* stats = nullptr);

struct GreedyCombConfig {
  MsConfig ms;  // backend is forced to greedy_ls
  HeurCombParams heur;
};

// Cheap variant: gather with the greedy backend for the whole budget, then a
// single swap-search combine; no polish pass.
Factorization greedy_comb(const BoolMatrix& x, const BoolMatrix& mask, std::size_t rank, Rng& rng,
                          const GreedyCombConfig& cfg = {}, CombineStats* stats = nullptr,
                          FactorPool* pool_out = nullptr);

struct GreedyTreeConfig {
  std::size_t calls = 3;
  double per_call_budget = 10.0;
  std::size_t per_call_runs = 0;  // fixed-count alternative to the budget
  GreedyCombConfig call;
  HeurCombParams heur;  // final combine over the calls' result factors
};

// Runs greedy_comb `calls` times on derived seeds, pools only the factors of
// each call's result, and swap-combines those.
Factorization greedy_tree_bmf(const BoolMatrix& x, const BoolMatrix& mask, std::size_t rank,
                              std::uint64_t seed, const GreedyTreeConfig& cfg = {},
                              CombineStats* stats = nullptr);

struct DiversifyParams {
  std::uint64_t w_min = 10;  // minimum documents per kept topic
  std::uint64_t ratio = 8;   // required dominance of diagonal over overlap
  HeurCombParams heur;
};

// Topic cleanup: repeatedly evict topics that are too rare (fewer than w_min
// documents) or dominated by their overlap with another topic (diagonal less
// than ratio times the off-diagonal entry), refilling each vacated slot from
// the remaining pool by swap search. Evicted factors never come back. Stops
// when both conditions hold, or when the active pool no longer exceeds rank.
CombineSelection diversify(const BoolMatrix& x, const BoolMatrix& mask, const BoolMatrix& w,
                           const BoolMatrix& h, FactorPool& pool, std::size_t rank, Rng& rng,
                           const DiversifyParams& params = {});

}  // namespace bmf
