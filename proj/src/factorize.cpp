#include "factorize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "nmf.hpp"

namespace bmf {

namespace {

using Clock = std::chrono::steady_clock;

// Solve H column by column against fixed W. The greedy backend only commits
// a column when it is no worse than the incumbent column, so a sweep can
// never regress the objective.
void solve_columns(const BoolMatrix& x, const BoolMatrix& mask, const BoolMatrix& w, BoolMatrix& h,
                   Rng& rng, const AOConfig& cfg) {
  const std::size_t r = w.cols();
  const std::size_t n = x.cols();
  std::vector<const BitVec*> wcols(r);
  for (std::size_t k = 0; k < r; ++k) wcols[k] = &w.col(k);

  BitVec cur(r);
  for (std::size_t j = 0; j < n; ++j) {
    BoolLSInstance inst(wcols, x.col(j), mask.col(j));
    if (cfg.backend == Backend::exact) {
      BoolLSResult res = solve_exact(inst, cfg.exact_rank_limit);
      for (std::size_t k = 0; k < r; ++k) h.set(k, j, res.h.get(k));
    } else {
      BoolLSResult res = solve_greedy_ls(inst, rng, cfg.ls);
      cur.clear();
      for (std::size_t k = 0; k < r; ++k)
        if (h.get(k, j)) cur.set(k);
      if (res.error <= selection_error(inst, cur))
        for (std::size_t k = 0; k < r; ++k) h.set(k, j, res.h.get(k));
    }
  }
}

// Solve W row by row against fixed H; the subproblem columns are H's rows,
// so no transpose is materialized.
void solve_rows(const BoolMatrix& x, const BoolMatrix& mask, const BoolMatrix& h, BoolMatrix& w,
                Rng& rng, const AOConfig& cfg) {
  const std::size_t r = h.rows();
  const std::size_t m = x.rows();
  std::vector<const BitVec*> hrows(r);
  for (std::size_t k = 0; k < r; ++k) hrows[k] = &h.row(k);

  for (std::size_t i = 0; i < m; ++i) {
    BoolLSInstance inst(hrows, x.row(i), mask.row(i));
    if (cfg.backend == Backend::exact) {
      w.set_row(i, solve_exact(inst, cfg.exact_rank_limit).h);
    } else {
      BoolLSResult res = solve_greedy_ls(inst, rng, cfg.ls);
      if (res.error <= selection_error(inst, w.row(i))) w.set_row(i, std::move(res.h));
    }
  }
}

// An all-zero row of H contributes nothing and would stay zero forever under
// the rowwise updates. Reseed each such row with a residual row of x (the
// observed ones not yet covered), richest rows first.
void revive_zero_rows(const BoolMatrix& x, const BoolMatrix& mask, const BoolMatrix& w,
                      BoolMatrix& h) {
  std::vector<std::size_t> dead;
  for (std::size_t k = 0; k < h.rows(); ++k)
    if (h.row(k).none()) dead.push_back(k);
  if (dead.empty()) return;

  const std::size_t m = x.rows();
  BoolMatrix p = bool_product(w, h);
  std::vector<BitVec> resid(m);
  std::vector<std::uint64_t> weight(m);
  for (std::size_t i = 0; i < m; ++i) {
    resid[i] = and_andnot(mask.row(i), x.row(i), p.row(i));
    weight[i] = resid[i].count();
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return weight[a] > weight[b]; });
  for (std::size_t t = 0; t < dead.size(); ++t) h.set_row(dead[t], resid[order[t % m]]);
}

struct TransposedView {
  BoolMatrix x, mask;
};

}  // namespace

BoolMatrix init_random_selection(const BoolMatrix& x, std::size_t rank, bool columns, Rng& rng) {
  const std::size_t avail = columns ? x.cols() : x.rows();
  if (rank == 0) throw std::invalid_argument("init_random_selection: rank must be positive");
  if (rank > avail)
    throw std::invalid_argument(
        "init_random_selection: rank exceeds the number of available columns/rows");

  // Partial Fisher-Yates draw of `rank` distinct indices.
  std::vector<std::size_t> idx(avail);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t t = 0; t < rank; ++t)
    std::swap(idx[t], idx[t + rng.below(avail - t)]);

  if (columns) {
    BoolMatrix w(x.rows(), rank);
    for (std::size_t t = 0; t < rank; ++t)
      x.col(idx[t]).for_each_set([&](std::size_t i) { w.set(i, t); });
    return w;
  }
  BoolMatrix h(rank, x.cols());
  for (std::size_t t = 0; t < rank; ++t) h.set_row(t, x.row(idx[t]));
  return h;
}

std::pair<BoolMatrix, BoolMatrix> init_nmf(const BoolMatrix& x, const BoolMatrix& mask,
                                           std::size_t rank, const InitConfig& cfg, Rng& rng) {
  NmfFactors f = weighted_nmf(x, mask, rank, cfg.nmf_iters, rng);

  // Balance each component so thresholding treats the two factors alike;
  // components that died during the updates are left as-is.
  for (Eigen::Index k = 0; k < f.w.cols(); ++k) {
    const double mw = f.w.col(k).maxCoeff();
    const double mh = f.h.row(k).maxCoeff();
    if (mw > 0.0 && mh > 0.0) {
      const double a = std::sqrt(mh / mw);
      f.w.col(k) *= a;
      f.h.row(k) /= a;
    }
  }

  const double delta =
      cfg.delta_override ? *cfg.delta_override : 0.3 + 0.4 * rng.real01();
  auto bit = [&](double v) { return v > 0.0 && v >= delta; };

  BoolMatrix w0(x.rows(), rank), h0(rank, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t k = 0; k < rank; ++k)
      if (bit(f.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)))) w0.set(i, k);
  for (std::size_t k = 0; k < rank; ++k)
    for (std::size_t j = 0; j < x.cols(); ++j)
      if (bit(f.h(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)))) h0.set(k, j);
  return {std::move(w0), std::move(h0)};
}

Factorization ao_bmf(const BoolMatrix& x, const BoolMatrix& mask, const BoolMatrix& w0, Rng& rng,
                     const AOConfig& cfg) {
  if (x.rows() != mask.rows() || x.cols() != mask.cols())
    throw std::invalid_argument("ao_bmf: mask shape mismatch");
  if (w0.rows() != x.rows()) throw std::invalid_argument("ao_bmf: w0 row count mismatch");
  const std::size_t rank = w0.cols();
  if (rank == 0) throw std::invalid_argument("ao_bmf: rank must be positive");
  if (cfg.maxiter == 0) throw std::invalid_argument("ao_bmf: maxiter must be positive");
  if (cfg.backend == Backend::exact && rank > cfg.exact_rank_limit)
    throw capability_error("ao_bmf: rank " + std::to_string(rank) +
                           " exceeds the exact backend limit " +
                           std::to_string(cfg.exact_rank_limit));

  const std::int64_t total_ones = static_cast<std::int64_t>(x.ones_count());
  Factorization out;
  out.method = cfg.backend == Backend::exact ? "ao-exact" : "ao-greedy";
  // Two bootstrap entries: the error of the empty factorization on the full
  // matrix, then a sentinel one below it so the first sweep always gets
  // evaluated against something it can beat.
  out.trace = {total_ones, total_ones - 1};

  BoolMatrix w = w0;
  BoolMatrix h(rank, x.cols());
  std::uint64_t incumbent = 0;
  bool have = false;

  for (std::size_t it = 0; it < cfg.maxiter; ++it) {
    solve_columns(x, mask, w, h, rng, cfg);
    revive_zero_rows(x, mask, w, h);
    solve_rows(x, mask, h, w, rng, cfg);
    const std::uint64_t e = masked_sq_error(x, mask, bool_product(w, h));

    if (have && e >= incumbent) break;  // no strict progress: discard and stop
    out.w = w;
    out.h = h;
    incumbent = e;
    out.trace.push_back(static_cast<std::int64_t>(e));
    out.sweeps = it + 1;
    if (!have) {
      have = true;
      if (static_cast<std::int64_t>(e) >= out.trace[1]) break;  // already at the floor
    }
  }

  out.error = incumbent;
  return out;
}

Factorization ms_ao(const BoolMatrix& x, const BoolMatrix& mask, std::size_t rank, Rng& rng,
                    const MsConfig& cfg, MsStats* stats, const RunObserver& on_run) {
  if (rank == 0) throw std::invalid_argument("ms_ao: rank must be positive");
  if (x.rows() != mask.rows() || x.cols() != mask.cols())
    throw std::invalid_argument("ms_ao: mask shape mismatch");
  const bool masked = !is_all_ones(mask);
  if (masked && (cfg.init.strategy == InitStrategy::random_columns ||
                 cfg.init.strategy == InitStrategy::random_rows))
    throw std::invalid_argument(
        "ms_ao: random column/row initialization needs complete data; use the nmf strategy");

  // For row-based inits the whole problem is solved transposed, so the
  // transposes are cached across runs.
  std::optional<TransposedView> tv;
  auto transposed = [&]() -> TransposedView& {
    if (!tv) tv = TransposedView{x.transposed(), mask.transposed()};
    return *tv;
  };

  const auto t0 = Clock::now();
  Factorization best;
  bool have = false;
  std::size_t run = 0;
  std::size_t random_uses = 0;

  do {
    InitStrategy s = cfg.init.strategy;
    if (s == InitStrategy::alternate) {
      if (masked)
        s = InitStrategy::nmf;
      else if (run % 2 == 0) {
        s = (random_uses % 2 == 0) ? InitStrategy::random_columns : InitStrategy::random_rows;
        ++random_uses;
      } else {
        s = InitStrategy::nmf;
      }
    }

    Factorization f;
    switch (s) {
      case InitStrategy::random_columns: {
        BoolMatrix w0 = init_random_selection(x, rank, true, rng);
        f = ao_bmf(x, mask, w0, rng, cfg.ao);
        break;
      }
      case InitStrategy::random_rows: {
        // Seeding H from rows of x is the columns case of the transposed
        // problem; solve there and flip the factors back.
        TransposedView& t = transposed();
        BoolMatrix h0 = init_random_selection(x, rank, false, rng);
        Factorization ft = ao_bmf(t.x, t.mask, h0.transposed(), rng, cfg.ao);
        f.w = ft.h.transposed();
        f.h = ft.w.transposed();
        f.error = ft.error;
        f.trace = std::move(ft.trace);
        f.sweeps = ft.sweeps;
        f.method = ft.method;
        break;
      }
      default: {
        auto [w0, h0] = init_nmf(x, mask, rank, cfg.init, rng);
        (void)h0;  // the first half-sweep recomputes H from w0 anyway
        f = ao_bmf(x, mask, w0, rng, cfg.ao);
        break;
      }
    }

    if (on_run) on_run(f, run);
    if (!have || f.error < best.error) {
      best = std::move(f);
      have = true;
    }
    ++run;

    if (cfg.max_runs > 0) {
      if (run >= cfg.max_runs) break;
    } else {
      if (cfg.budget_seconds <= 0.0) break;
      if (std::chrono::duration<double>(Clock::now() - t0).count() >= cfg.budget_seconds) break;
    }
  } while (true);

  if (stats) {
    stats->runs = run;
    stats->best_error = best.error;
    stats->elapsed_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  }
  best.method = "ms-ao";
  return best;
}

}  // namespace bmf
