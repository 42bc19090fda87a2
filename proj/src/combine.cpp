#include "combine.hpp"

#include <algorithm>
#include <chrono>
#include <queue>
#include <string>

namespace bmf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// C(n, k) saturated at a ceiling so callers can compare against caps without
// overflow concerns.
std::uint64_t choose_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    if (r > cap) return cap + 1;
    // multiply first, divide after: intermediate stays exact
    r = r * (n - k + i) / i;
  }
  return std::min(r, cap + 1);
}

void check_selection(const std::vector<std::size_t>& sel, std::size_t pool_size) {
  std::vector<std::size_t> sorted = sel;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t t = 0; t < sorted.size(); ++t) {
    if (sorted[t] >= pool_size) throw std::invalid_argument("selection index out of range");
    if (t > 0 && sorted[t] == sorted[t - 1])
      throw std::invalid_argument("selection contains a duplicate index");
  }
}

// Preference-ordered argmin: the earliest candidate whose error is no worse
// than every later one wins ties.
const Factorization* best_of(std::initializer_list<const Factorization*> cands) {
  const Factorization* best = nullptr;
  for (const Factorization* c : cands) {
    if (!c) continue;
    if (!best || c->error < best->error) best = c;
  }
  return best;
}

}  // namespace

FactorPool::FactorPool(std::size_t rows, std::size_t cols, std::size_t cache_budget_bytes)
    : m_(rows), n_(cols), cache_budget_(cache_budget_bytes) {}

std::size_t FactorPool::add(BitVec w, BitVec h, std::size_t source) {
  if (w.size() != m_ || h.size() != n_)
    throw std::invalid_argument("FactorPool::add: factor shape mismatch");
  if (w.none() || h.none()) {
    // Either side empty makes the outer product empty; use one canonical
    // representation so all such factors collapse together.
    w = BitVec(m_);
    h = BitVec(n_);
  }
  const std::uint64_t key = w.hash() * 0x9E3779B97F4A7C15ull ^ h.hash();
  auto& bucket = buckets_[key];
  for (std::size_t idx : bucket)
    if (fs_[idx].w == w && fs_[idx].h == h) return idx;
  fs_.push_back(RankOneFactor{std::move(w), std::move(h), source});
  flat_.emplace_back();
  bucket.push_back(fs_.size() - 1);
  return fs_.size() - 1;
}

std::vector<std::size_t> FactorPool::add_factorization(const Factorization& f,
                                                       std::size_t source) {
  if (f.w.rows() != m_ || f.h.cols() != n_ || f.w.cols() != f.h.rows())
    throw std::invalid_argument("FactorPool::add_factorization: shape mismatch");
  std::vector<std::size_t> sel;
  for (std::size_t k = 0; k < f.w.cols(); ++k) {
    const std::size_t idx = add(f.w.col_copy(k), f.h.row(k), source);
    if (std::find(sel.begin(), sel.end(), idx) == sel.end()) sel.push_back(idx);
  }
  return sel;
}

const BitVec* FactorPool::flattened(std::size_t i) const {
  assert(i < fs_.size());
  if (flat_[i]) return &*flat_[i];
  const std::size_t bytes = BitVec::word_count(m_ * n_) * sizeof(BitVec::Word);
  if (cache_used_ + bytes > cache_budget_) return nullptr;
  BitVec v(m_ * n_);
  fs_[i].w.for_each_set([&](std::size_t row) { or_shifted(v, row * n_, fs_[i].h); });
  flat_[i] = std::move(v);
  cache_used_ += bytes;
  return &*flat_[i];
}

SelectionEvaluator::SelectionEvaluator(const BoolMatrix& x, const BoolMatrix& mask,
                                       const FactorPool& pool)
    : x_(x), mask_(mask), pool_(pool) {
  if (x.rows() != pool.rows() || x.cols() != pool.cols() || mask.rows() != x.rows() ||
      mask.cols() != x.cols())
    throw std::invalid_argument("SelectionEvaluator: shape mismatch");
  const std::size_t mn = x.rows() * x.cols();
  // Only flatten the data when three flattened vectors comfortably fit.
  if (BitVec::word_count(mn) * sizeof(BitVec::Word) * 3 <= kDefaultVecCacheBudget) {
    use_flat_ = true;
    flat_x_ = BitVec(mn);
    flat_mask_ = BitVec(mn);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      or_shifted(flat_x_, i * x.cols(), x.row(i));
      or_shifted(flat_mask_, i * x.cols(), mask.row(i));
    }
    acc_ = BitVec(mn);
  }
  row_acc_ = BitVec(x.cols());
}

std::uint64_t SelectionEvaluator::error(const std::vector<std::size_t>& sel) const {
  if (use_flat_) {
    bool ok = true;
    acc_.clear();
    for (std::size_t idx : sel) {
      const BitVec* f = pool_.flattened(idx);
      if (!f) {
        ok = false;
        break;
      }
      acc_ |= *f;
    }
    if (ok) return masked_hamming(flat_mask_, flat_x_, acc_);
  }
  return rowwise(sel);
}

std::uint64_t SelectionEvaluator::rowwise(const std::vector<std::size_t>& sel) const {
  std::uint64_t err = 0;
  for (std::size_t i = 0; i < x_.rows(); ++i) {
    row_acc_.clear();
    for (std::size_t idx : sel)
      if (pool_.factor(idx).w.get(i)) row_acc_ |= pool_.factor(idx).h;
    err += masked_hamming(mask_.row(i), x_.row(i), row_acc_);
  }
  return err;
}

std::uint64_t SelectionEvaluator::error_swap(const std::vector<std::size_t>& sel, std::size_t slot,
                                             std::size_t replacement) const {
  scratch_ = sel;
  scratch_[slot] = replacement;
  return error(scratch_);
}

std::uint64_t SelectionEvaluator::error_extend(const std::vector<std::size_t>& sel,
                                               std::size_t extra) const {
  scratch_ = sel;
  scratch_.push_back(extra);
  return error(scratch_);
}

CombineSelection combine_exact(const BoolMatrix& x, const BoolMatrix& mask, const FactorPool& pool,
                               std::size_t rank, std::size_t exact_limit,
                               std::uint64_t subset_cap) {
  const std::size_t n_pool = pool.size();
  if (n_pool == 0) throw std::invalid_argument("combine_exact: empty pool");
  if (rank == 0) throw std::invalid_argument("combine_exact: rank must be positive");
  const std::size_t r = std::min(rank, n_pool);
  if (n_pool > exact_limit && choose_capped(n_pool, r, subset_cap) > subset_cap)
    throw capability_error("combine_exact: pool of " + std::to_string(n_pool) +
                           " factors is too large; use the heuristic combiner");

  const std::size_t mn = x.rows() * x.cols();
  const std::size_t flat_bytes = BitVec::word_count(mn) * sizeof(BitVec::Word);
  if (flat_bytes * (n_pool + 2) > (512ull << 20))
    throw capability_error("combine_exact: flattening the pool would need too much memory");

  // Local flattened forms (independent of the pool's cache budget).
  BitVec fx(mn), fm(mn);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    or_shifted(fx, i * x.cols(), x.row(i));
    or_shifted(fm, i * x.cols(), mask.row(i));
  }
  std::vector<BitVec> flats(n_pool, BitVec(mn));
  for (std::size_t idx = 0; idx < n_pool; ++idx)
    pool.factor(idx).w.for_each_set(
        [&](std::size_t row) { or_shifted(flats[idx], row * x.cols(), pool.factor(idx).h); });

  // suffix[d]: everything factors d.. could still cover.
  std::vector<BitVec> suffix(n_pool + 1, BitVec(mn));
  for (std::size_t d = n_pool; d-- > 0;) {
    suffix[d] = suffix[d + 1];
    suffix[d] |= flats[d];
  }

  const auto bound_of = [&](const BitVec& cover, std::size_t d, bool complete) {
    const auto& cw = cover.words();
    const auto& sw = suffix[d].words();
    const auto& xw = fx.words();
    const auto& mw = fm.words();
    std::uint64_t b = 0;
    for (std::size_t t = 0; t < cw.size(); ++t) {
      b += static_cast<std::uint64_t>(std::popcount(mw[t] & ~xw[t] & cw[t]));
      const BitVec::Word reach = complete ? cw[t] : (cw[t] | sw[t]);
      b += static_cast<std::uint64_t>(std::popcount(mw[t] & xw[t] & ~reach));
    }
    return b;
  };

  // Incumbent from greedy forward selection; nodes with a worse bound are
  // never expanded.
  CombineSelection incumbent = greedy_forward_selection(x, mask, pool, r);

  struct Node {
    std::uint64_t bound;
    std::uint64_t seq;
    std::uint32_t next;
    std::vector<std::uint32_t> chosen;
  };
  const auto worse = [](const Node& a, const Node& b) {
    return a.bound != b.bound ? a.bound > b.bound : a.seq > b.seq;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);

  BitVec cover(mn);
  const auto cover_of = [&](const std::vector<std::uint32_t>& chosen) -> const BitVec& {
    cover.clear();
    for (std::uint32_t idx : chosen) cover |= flats[idx];
    return cover;
  };

  std::uint64_t seq = 0;
  open.push(Node{bound_of(cover_of({}), 0, false), seq++, 0, {}});
  const std::uint64_t node_cap = subset_cap * 4 + 1024;
  std::uint64_t expanded = 0;

  while (!open.empty()) {
    Node cur = open.top();
    open.pop();
    if (cur.bound > incumbent.error) break;  // nothing left can beat the incumbent
    if (cur.chosen.size() == r) {
      // A popped complete node's error is its bound, and no open node can
      // improve on it.
      CombineSelection out;
      out.indices.assign(cur.chosen.begin(), cur.chosen.end());
      out.error = cur.bound;
      return out;
    }
    if (++expanded > node_cap)
      throw capability_error("combine_exact: search exceeded the node cap");

    const std::size_t d = cur.next;
    const std::size_t remaining = n_pool - d;
    const std::size_t needed = r - cur.chosen.size();
    if (remaining == 0 || remaining < needed) continue;

    const BitVec& base_cover = cover_of(cur.chosen);
    // include factor d
    {
      Node child;
      child.chosen = cur.chosen;
      child.chosen.push_back(static_cast<std::uint32_t>(d));
      child.next = static_cast<std::uint32_t>(d + 1);
      BitVec c2 = base_cover;
      c2 |= flats[d];
      child.bound = bound_of(c2, d + 1, child.chosen.size() == r);
      if (child.bound <= incumbent.error) {
        child.seq = seq++;
        open.push(std::move(child));
      }
    }
    // skip factor d (only if enough factors remain to reach r)
    if (remaining - 1 >= needed) {
      Node child;
      child.chosen = cur.chosen;
      child.next = static_cast<std::uint32_t>(d + 1);
      child.bound = bound_of(base_cover, d + 1, false);
      if (child.bound <= incumbent.error) {
        child.seq = seq++;
        open.push(std::move(child));
      }
    }
  }
  return incumbent;
}

CombineSelection combine_heuristic(const BoolMatrix& x, const BoolMatrix& mask,
                                   const FactorPool& pool, std::size_t rank,
                                   CombineSelection start, Rng& rng,
                                   const HeurCombParams& params) {
  if (params.t_max == 0 || params.n_trials == 0)
    throw std::invalid_argument("combine_heuristic: t_max and n_trials must be positive");
  const std::size_t n_pool = pool.size();
  if (n_pool == 0) throw std::invalid_argument("combine_heuristic: empty pool");
  const std::size_t r = std::min(rank, n_pool);
  check_selection(start.indices, n_pool);
  if (start.indices.size() != r)
    throw std::invalid_argument("combine_heuristic: start selection has the wrong size");

  SelectionEvaluator eval(x, mask, pool);
  std::vector<std::size_t> sel = start.indices;
  std::uint64_t best_err = eval.error(sel);
  if (n_pool == r) return {sel, best_err};  // nothing outside to swap in

  std::vector<char> selected(n_pool, 0);
  for (std::size_t idx : sel) selected[idx] = 1;
  std::vector<std::size_t> outside;
  outside.reserve(n_pool - r);
  for (std::size_t i = 0; i < n_pool; ++i)
    if (!selected[i]) outside.push_back(i);

  const auto t0 = Clock::now();
  std::size_t accepted = 1, failures = 1;
  while (failures <= params.n_trials && accepted <= params.t_max) {
    if (params.budget_seconds > 0.0 && seconds_since(t0) >= params.budget_seconds) break;
    const std::size_t pos = rng.below(outside.size());
    const std::size_t cand = outside[pos];
    const std::size_t slot = rng.below(r);
    const std::uint64_t e = eval.error_swap(sel, slot, cand);
    if (e < best_err) {
      outside[pos] = sel[slot];  // evicted factor becomes available again
      sel[slot] = cand;
      best_err = e;
      ++accepted;
      failures = 1;
    } else {
      ++failures;
    }
  }
  return {std::move(sel), best_err};
}

CombineSelection greedy_forward_selection(const BoolMatrix& x, const BoolMatrix& mask,
                                          const FactorPool& pool, std::size_t rank,
                                          std::vector<std::size_t> base) {
  const std::size_t n_pool = pool.size();
  if (n_pool == 0) throw std::invalid_argument("greedy_forward_selection: empty pool");
  check_selection(base, n_pool);
  const std::size_t r = std::min(rank, n_pool);
  if (base.size() > r) throw std::invalid_argument("greedy_forward_selection: base too large");

  SelectionEvaluator eval(x, mask, pool);
  std::vector<char> selected(n_pool, 0);
  for (std::size_t idx : base) selected[idx] = 1;

  while (base.size() < r) {
    std::uint64_t best_err = ~std::uint64_t{0};
    std::size_t best_idx = n_pool;
    for (std::size_t c = 0; c < n_pool; ++c) {
      if (selected[c]) continue;
      const std::uint64_t e = eval.error_extend(base, c);
      if (e < best_err) {
        best_err = e;
        best_idx = c;
      }
    }
    base.push_back(best_idx);
    selected[best_idx] = 1;
  }
  const std::uint64_t err = eval.error(base);
  return {std::move(base), err};
}

Factorization rebuild(const BoolMatrix& x, const BoolMatrix& mask, const FactorPool& pool,
                      const CombineSelection& sel, std::size_t rank) {
  check_selection(sel.indices, pool.size());
  if (sel.indices.size() > rank) throw std::invalid_argument("rebuild: selection exceeds rank");
  Factorization f;
  f.w = BoolMatrix(pool.rows(), rank);
  f.h = BoolMatrix(rank, pool.cols());
  for (std::size_t t = 0; t < sel.indices.size(); ++t) {
    const RankOneFactor& fac = pool.factor(sel.indices[t]);
    fac.w.for_each_set([&](std::size_t i) { f.w.set(i, t); });
    f.h.set_row(t, fac.h);
  }
  f.error = masked_sq_error(x, mask, bool_product(f.w, f.h));
  f.trace = {static_cast<std::int64_t>(f.error)};
  f.method = "combine";
  return f;
}

namespace {

// Shared tail of the orchestrators: pick the best subset of `pool`, seeded
// with the best gathered run's own factors.
CombineSelection combine_pool(const BoolMatrix& x, const BoolMatrix& mask, const FactorPool& pool,
                              std::size_t rank, const std::vector<std::size_t>& seed_sel,
                              Rng& rng, const HeurCombParams& heur, std::size_t exact_limit,
                              std::uint64_t subset_cap, bool allow_exact, bool* used_exact) {
  const std::size_t r = std::min(rank, pool.size());
  if (used_exact) *used_exact = false;
  if (allow_exact) {
    try {
      CombineSelection s = combine_exact(x, mask, pool, rank, exact_limit, subset_cap);
      if (used_exact) *used_exact = true;
      return s;
    } catch (const capability_error&) {
      // fall through to the swap search
    }
  }
  std::vector<std::size_t> base = seed_sel;
  if (base.size() > r) base.resize(r);
  CombineSelection start = greedy_forward_selection(x, mask, pool, rank, std::move(base));
  return combine_heuristic(x, mask, pool, rank, std::move(start), rng, heur);
}

}  // namespace

Factorization ms_comb_ao(const BoolMatrix& x, const BoolMatrix& mask, std::size_t rank, Rng& rng,
                         const MsCombConfig& cfg, CombineStats* stats, FactorPool* pool_out) {
  const auto t0 = Clock::now();
  FactorPool local_pool(x.rows(), x.cols());
  FactorPool& pool = pool_out ? *pool_out : local_pool;
  if (pool.rows() != x.rows() || pool.cols() != x.cols())
    throw std::invalid_argument("ms_comb_ao: pool shape mismatch");

  // Gathering gets three quarters of the budget, combining the rest.
  MsConfig gather = cfg.ms;
  gather.budget_seconds = cfg.ms.budget_seconds * 0.75;

  Factorization best_run;
  std::vector<std::size_t> best_sel;
  bool have = false;
  std::size_t runs = 0;
  auto observe = [&](const Factorization& f, std::size_t run_idx) {
    std::vector<std::size_t> sel = pool.add_factorization(f, run_idx);
    if (!have || f.error < best_run.error) {
      best_run = f;
      best_sel = std::move(sel);
      have = true;
    }
    ++runs;
  };
  ms_ao(x, mask, rank, rng, gather, nullptr, observe);

  HeurCombParams heur = cfg.heur;
  if (cfg.ms.max_runs == 0 && cfg.ms.budget_seconds > 0.0)
    heur.budget_seconds = cfg.ms.budget_seconds * 0.25;

  bool used_exact = false;
  CombineSelection sel = combine_pool(x, mask, pool, rank, best_sel, rng, heur,
                                      cfg.exact_combine_limit, cfg.subset_cap,
                                      /*allow_exact=*/true, &used_exact);
  Factorization combined = rebuild(x, mask, pool, sel, rank);
  Factorization polished = ao_bmf(x, mask, combined.w, rng, cfg.ms.ao);

  const Factorization* final_f = best_of({&polished, &combined, &best_run});
  Factorization out = *final_f;
  out.method = "ms-comb-ao";

  if (stats) {
    stats->runs = runs;
    stats->pool_size = pool.size();
    stats->best_gathered_error = best_run.error;
    stats->combined_error = combined.error;
    stats->final_error = out.error;
    stats->used_exact_combine = used_exact;
    stats->elapsed_seconds = seconds_since(t0);
  }
  return out;
}

Factorization tree_bmf(const BoolMatrix& x, const BoolMatrix& mask, std::size_t rank,
                       std::uint64_t seed, const TreeConfig& cfg, CombineStats* stats) {
  if (cfg.depth == 0) throw std::invalid_argument("tree_bmf: depth must be at least 1");
  if (cfg.children == 0) throw std::invalid_argument("tree_bmf: need at least one child per node");
  if (cfg.leaf_solutions == 0)
    throw std::invalid_argument("tree_bmf: leaf_solutions must be positive");

  const auto t0 = Clock::now();
  const double root_budget = cfg.node.ms.budget_seconds;
  std::size_t total_runs = 0;
  std::size_t pool_peak = 0;

  auto node = [&](auto&& self, std::size_t level, std::uint64_t node_seed) -> Factorization {
    const double budget = root_budget / static_cast<double>(std::size_t{1} << level);
    if (level == cfg.depth) {
      MsCombConfig leaf = cfg.node;
      leaf.ms.budget_seconds = budget;
      leaf.ms.max_runs = cfg.leaf_solutions;
      Rng lr(node_seed);
      CombineStats cs;
      Factorization f = ms_comb_ao(x, mask, rank, lr, leaf, &cs, nullptr);
      total_runs += cs.runs;
      return f;
    }

    FactorPool pool(x.rows(), x.cols());
    Factorization best_child;
    std::vector<std::size_t> best_sel;
    bool have = false;
    for (std::size_t c = 0; c < cfg.children; ++c) {
      Factorization f = self(self, level + 1, child_seed(node_seed, c));
      std::vector<std::size_t> sel = pool.add_factorization(f, c);
      if (!have || f.error < best_child.error) {
        best_child = std::move(f);
        best_sel = std::move(sel);
        have = true;
      }
    }
    pool_peak = std::max(pool_peak, pool.size());

    HeurCombParams heur = cfg.node.heur;
    if (root_budget > 0.0) heur.budget_seconds = budget * 0.5;
    Rng cr(splitmix64(node_seed ^ 0xC0FFEEull));
    CombineSelection sel = combine_pool(x, mask, pool, rank, best_sel, cr, heur,
                                        cfg.node.exact_combine_limit, cfg.node.subset_cap,
                                        /*allow_exact=*/true, nullptr);
    Factorization combined = rebuild(x, mask, pool, sel, rank);

    if (level == 0) {
      Rng pr(splitmix64(node_seed ^ 0xF005BA11ull));
      Factorization polished = ao_bmf(x, mask, combined.w, pr, cfg.node.ms.ao);
      Factorization out = *best_of({&polished, &combined, &best_child});
      out.method = "tree-bmf";
      return out;
    }
    return *best_of({&combined, &best_child});
  };

  Factorization out = node(node, 0, seed);
  out.method = "tree-bmf";
  out.seed = seed;
  if (stats) {
    stats->runs = total_runs;
    stats->pool_size = pool_peak;
    stats->final_error = out.error;
    stats->elapsed_seconds = seconds_since(t0);
  }
  return out;
}

Factorization greedy_comb(const BoolMatrix& x, const BoolMatrix& mask, std::size_t rank, Rng& rng,
                          const GreedyCombConfig& cfg, CombineStats* stats,
                          FactorPool* pool_out) {
  const auto t0 = Clock::now();
  FactorPool local_pool(x.rows(), x.cols());
  FactorPool& pool = pool_out ? *pool_out : local_pool;
  if (pool.rows() != x.rows() || pool.cols() != x.cols())
    throw std::invalid_argument("greedy_comb: pool shape mismatch");

  MsConfig gather = cfg.ms;
  gather.ao.backend = Backend::greedy_ls;  // this variant is defined by the cheap backend

  Factorization best_run;
  std::vector<std::size_t> best_sel;
  bool have = false;
  std::size_t runs = 0;
  auto observe = [&](const Factorization& f, std::size_t run_idx) {
    std::vector<std::size_t> sel = pool.add_factorization(f, run_idx);
    if (!have || f.error < best_run.error) {
      best_run = f;
      best_sel = std::move(sel);
      have = true;
    }
    ++runs;
  };
  ms_ao(x, mask, rank, rng, gather, nullptr, observe);

  CombineSelection sel = combine_pool(x, mask, pool, rank, best_sel, rng, cfg.heur,
                                      /*exact_limit=*/0, /*subset_cap=*/0,
                                      /*allow_exact=*/false, nullptr);
  Factorization combined = rebuild(x, mask, pool, sel, rank);

  Factorization out = *best_of({&combined, &best_run});  // no polish in this variant
  out.method = "greedy-comb";
  if (stats) {
    stats->runs = runs;
    stats->pool_size = pool.size();
    stats->best_gathered_error = best_run.error;
    stats->combined_error = combined.error;
    stats->final_error = out.error;
    stats->elapsed_seconds = seconds_since(t0);
  }
  return out;
}

Factorization greedy_tree_bmf(const BoolMatrix& x, const BoolMatrix& mask, std::size_t rank,
                              std::uint64_t seed, const GreedyTreeConfig& cfg,
                              CombineStats* stats) {
  if (cfg.calls == 0) throw std::invalid_argument("greedy_tree_bmf: calls must be positive");
  const auto t0 = Clock::now();

  // Only the factors of each call's final result are pooled here, not the
  // full pools the calls saw internally.
  FactorPool pool(x.rows(), x.cols());
  Factorization best_call;
  std::vector<std::size_t> best_sel;
  bool have = false;

  for (std::size_t c = 0; c < cfg.calls; ++c) {
    GreedyCombConfig call = cfg.call;
    call.ms.budget_seconds = cfg.per_call_budget;
    call.ms.max_runs = cfg.per_call_runs;
    Rng cr(child_seed(seed, c));
    Factorization f = greedy_comb(x, mask, rank, cr, call, nullptr, nullptr);
    std::vector<std::size_t> sel = pool.add_factorization(f, c);
    if (!have || f.error < best_call.error) {
      best_call = std::move(f);
      best_sel = std::move(sel);
      have = true;
    }
  }

  Rng fr(child_seed(seed, cfg.calls));
  CombineSelection sel = combine_pool(x, mask, pool, rank, best_sel, fr, cfg.heur,
                                      /*exact_limit=*/0, /*subset_cap=*/0,
                                      /*allow_exact=*/false, nullptr);
  Factorization combined = rebuild(x, mask, pool, sel, rank);

  Factorization out = *best_of({&combined, &best_call});
  out.method = "greedy-tree";
  out.seed = seed;
  if (stats) {
    stats->runs = cfg.calls;
    stats->pool_size = pool.size();
    stats->best_gathered_error = best_call.error;
    stats->combined_error = combined.error;
    stats->final_error = out.error;
    stats->elapsed_seconds = seconds_since(t0);
  }
  return out;
}

CombineSelection diversify(const BoolMatrix& x, const BoolMatrix& mask, const BoolMatrix& w,
                           const BoolMatrix& h, FactorPool& pool, std::size_t rank, Rng& rng,
                           const DiversifyParams& params) {
  if (w.cols() != h.rows()) throw std::invalid_argument("diversify: factor shape mismatch");
  if (rank == 0) throw std::invalid_argument("diversify: rank must be positive");
  if (params.heur.t_max == 0 || params.heur.n_trials == 0)
    throw std::invalid_argument("diversify: t_max and n_trials must be positive");

  // Map the current factorization into the pool; duplicates collapse.
  std::vector<std::size_t> sel;
  for (std::size_t k = 0; k < w.cols(); ++k) {
    const std::size_t idx = pool.add(w.col_copy(k), h.row(k), ~std::size_t{0});
    if (std::find(sel.begin(), sel.end(), idx) == sel.end()) sel.push_back(idx);
  }

  std::vector<char> active(pool.size(), 1);
  SelectionEvaluator eval(x, mask, pool);

  // Refill `slot` (whose factor was just deactivated) from the remaining
  // active pool by accept-if-better sampling; falls back to the least bad
  // candidate seen, and drops the slot if there are no candidates at all.
  auto refill = [&](std::size_t slot) {
    std::vector<std::size_t> base = sel;
    base.erase(base.begin() + static_cast<std::ptrdiff_t>(slot));
    std::vector<char> in_base(pool.size(), 0);
    for (std::size_t idx : base) in_base[idx] = 1;
    std::vector<std::size_t> cands;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (active[i] && !in_base[i]) cands.push_back(i);
    if (cands.empty()) {
      sel = std::move(base);
      return;
    }

    std::uint64_t bar = eval.error(base);
    std::optional<std::size_t> fill;
    std::uint64_t seen_best_err = ~std::uint64_t{0};
    std::size_t seen_best = cands[0];
    std::size_t accepted = 1, failures = 1;
    while (failures <= params.heur.n_trials && accepted <= params.heur.t_max) {
      const std::size_t c = cands[rng.below(cands.size())];
      const std::uint64_t e = eval.error_extend(base, c);
      if (e < seen_best_err) {
        seen_best_err = e;
        seen_best = c;
      }
      if (e < bar) {
        fill = c;
        bar = e;
        ++accepted;
        failures = 1;
      } else {
        ++failures;
      }
    }
    if (!fill) fill = seen_best;
    base.insert(base.begin() + static_cast<std::ptrdiff_t>(slot), *fill);
    sel = std::move(base);
  };

  for (;;) {
    std::size_t active_count = 0;
    for (char a : active) active_count += static_cast<std::size_t>(a);
    if (active_count <= rank) {
      // Too few factors left to be choosy: keep everything still active.
      sel.clear();
      for (std::size_t i = 0; i < pool.size(); ++i)
        if (active[i]) sel.push_back(i);
      break;
    }

    const std::size_t q = sel.size();
    // Topic overlap matrix over the selected document sets.
    std::vector<std::uint64_t> gram(q * q);
    for (std::size_t a = 0; a < q; ++a)
      for (std::size_t b = 0; b < q; ++b)
        gram[a * q + b] = and_count(pool.factor(sel[a]).h, pool.factor(sel[b]).h);

    std::size_t victim = q;
    for (std::size_t a = 0; a < q; ++a)
      if (gram[a * q + a] < params.w_min) {
        victim = a;
        break;
      }
    if (victim == q) {
      for (std::size_t a = 0; a < q && victim == q; ++a)
        for (std::size_t b = 0; b < q; ++b) {
          if (a == b) continue;
          if (gram[a * q + b] > 0 && gram[a * q + a] < params.ratio * gram[a * q + b]) {
            victim = b;
            break;
          }
        }
    }
    if (victim == q) break;  // both conditions hold everywhere

    active[sel[victim]] = 0;
    refill(victim);
  }

  return {sel, eval.error(sel)};
}

}  // namespace bmf
