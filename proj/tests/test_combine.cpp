#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "combine.hpp"
#include "oracles.hpp"

using bmf::BitVec;
using bmf::BoolMatrix;
using bmf::CombineSelection;
using bmf::Factorization;
using bmf::FactorPool;
using oracle::Grid;

namespace {

struct PoolSetup {
  Grid xg, mg;
  BoolMatrix x, mask;
  std::vector<oracle::RankOne> raw;
  FactorPool pool;

  PoolSetup(std::size_t m, std::size_t n, std::size_t count, bmf::Rng& rng,
            bool full_mask = true, std::size_t cache_budget = bmf::kDefaultVecCacheBudget)
      : xg(oracle::random_grid(m, n, rng)),
        mg(full_mask ? oracle::make_grid(m, n, 1) : oracle::random_grid(m, n, rng, 0.8)),
        x(oracle::to_matrix(xg)),
        mask(oracle::to_matrix(mg)),
        pool(m, n, cache_budget) {
    while (pool.size() < count) {
      oracle::RankOne f{oracle::random_bits(m, rng, 0.5), oracle::random_bits(n, rng, 0.5)};
      if (oracle::count_ones(f.w) == 0 || oracle::count_ones(f.h) == 0) continue;
      const std::size_t before = pool.size();
      pool.add(oracle::to_vec(f.w), oracle::to_vec(f.h), 0);
      if (pool.size() > before) raw.push_back(std::move(f));  // skip duplicates
    }
  }
};

}  // namespace

TEST_CASE("pool deduplicates by content and canonicalizes empty factors") {
  FactorPool pool(3, 4);
  const std::size_t a = pool.add(BitVec::parse("101"), BitVec::parse("1100"), 0);
  const std::size_t b = pool.add(BitVec::parse("101"), BitVec::parse("1100"), 7);
  CHECK(a == b);
  CHECK(pool.size() == 1);
  CHECK(pool.factor(a).source == 0);  // first insertion wins

  // Any factor with an all-zero side collapses to the canonical empty factor.
  const std::size_t z1 = pool.add(BitVec::parse("000"), BitVec::parse("1111"), 1);
  const std::size_t z2 = pool.add(BitVec::parse("111"), BitVec::parse("0000"), 2);
  CHECK(z1 == z2);
  CHECK(pool.size() == 2);
  CHECK(pool.factor(z1).w.none());
  CHECK(pool.factor(z1).h.none());

  CHECK_THROWS_AS(pool.add(BitVec::parse("10"), BitVec::parse("1100"), 0), std::invalid_argument);
}

TEST_CASE("adding a factorization returns its distinct pieces in order") {
  const BoolMatrix x = BoolMatrix::identity(3);
  const BoolMatrix mask = BoolMatrix::ones(3, 3);
  Factorization f;
  f.w = oracle::to_matrix({{1, 1, 0}, {0, 0, 1}, {0, 0, 0}});
  f.h = oracle::to_matrix({{1, 0, 0}, {1, 0, 0}, {0, 1, 0}});  // rows 0 and 1 identical
  FactorPool pool(3, 3);
  const std::vector<std::size_t> sel = pool.add_factorization(f, 4);
  CHECK(sel == std::vector<std::size_t>{0, 1});  // duplicate column collapsed
  CHECK(pool.size() == 2);
  CHECK(pool.factor(0).source == 4);
}

TEST_CASE("flattened factors match the per-entry outer product") {
  bmf::Rng rng(901);
  FactorPool pool(5, 7);
  for (int rep = 0; rep < 6; ++rep) {
    const std::vector<int> w = oracle::random_bits(5, rng);
    const std::vector<int> h = oracle::random_bits(7, rng);
    const std::size_t idx = pool.add(oracle::to_vec(w), oracle::to_vec(h), 0);
    const BitVec* flat = pool.flattened(idx);
    REQUIRE(flat != nullptr);
    REQUIRE(flat->size() == 35);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 7; ++j) CHECK(flat->get(i * 7 + j) == (w[i] && h[j]));
  }
}

TEST_CASE("a zero cache budget disables flattening but not evaluation") {
  bmf::Rng rng(902);
  PoolSetup s(6, 6, 5, rng, true, /*cache_budget=*/0);
  CHECK(s.pool.flattened(0) == nullptr);
  const bmf::SelectionEvaluator eval(s.x, s.mask, s.pool);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<std::size_t> sel;
    for (std::size_t i = 0; i < s.pool.size(); ++i)
      if (rng.below(2)) sel.push_back(i);
    CHECK(eval.error(sel) == oracle::combine_error(s.xg, s.mg, s.raw, sel));
  }
}

TEST_CASE("selection evaluator agrees with the oracle on both paths") {
  bmf::Rng rng(903);
  for (bool masked : {false, true}) {
    PoolSetup s(7, 9, 8, rng, !masked);
    const bmf::SelectionEvaluator eval(s.x, s.mask, s.pool);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<std::size_t> sel;
      for (std::size_t i = 0; i < s.pool.size(); ++i)
        if (rng.below(2)) sel.push_back(i);
      const std::uint64_t want = oracle::combine_error(s.xg, s.mg, s.raw, sel);
      CHECK(eval.error(sel) == want);
      if (!sel.empty()) {
        const std::size_t extra = rng.below(s.pool.size());
        std::vector<std::size_t> extended = sel;
        extended.push_back(extra);
        CHECK(eval.error_extend(sel, extra) == oracle::combine_error(s.xg, s.mg, s.raw, extended));
        std::vector<std::size_t> swapped = sel;
        swapped[0] = extra;
        CHECK(eval.error_swap(sel, 0, extra) == oracle::combine_error(s.xg, s.mg, s.raw, swapped));
      }
    }
  }
}

TEST_CASE("exact combining matches subset enumeration") {
  bmf::Rng rng(904);
  for (int rep = 0; rep < 8; ++rep) {
    const bool masked = rep % 2 == 1;
    PoolSetup s(8, 8, 10, rng, !masked);
    const std::size_t rank = 1 + rng.below(4);
    const CombineSelection got = bmf::combine_exact(s.x, s.mask, s.pool, rank);
    CHECK(got.error == oracle::brute_force_combine(s.xg, s.mg, s.raw, rank));
    CHECK(got.indices.size() == std::min(rank, s.pool.size()));
    const bmf::SelectionEvaluator eval(s.x, s.mask, s.pool);
    CHECK(eval.error(got.indices) == got.error);
  }
}

TEST_CASE("exact combining takes the whole pool when rank covers it") {
  bmf::Rng rng(905);
  PoolSetup s(6, 6, 3, rng);
  const CombineSelection got = bmf::combine_exact(s.x, s.mask, s.pool, 5);
  std::vector<std::size_t> sorted = got.indices;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("exact combining enforces its size caps") {
  bmf::Rng rng(906);
  PoolSetup s(6, 6, 26, rng);
  // 26 factors exceed the default pool limit and C(26,13) the subset cap.
  CHECK_THROWS_AS(bmf::combine_exact(s.x, s.mask, s.pool, 13), bmf::capability_error);
  // A tiny explicit subset cap trips even a small enumeration.
  CHECK_THROWS_AS(bmf::combine_exact(s.x, s.mask, s.pool, 3, 10, 5), bmf::capability_error);
  CHECK_THROWS_AS(bmf::combine_exact(s.x, s.mask, s.pool, 0), std::invalid_argument);
  FactorPool empty(6, 6);
  CHECK_THROWS_AS(bmf::combine_exact(s.x, s.mask, empty, 2), std::invalid_argument);
}

TEST_CASE("swap search keeps an optimal start unchanged") {
  bmf::Rng rng(907);
  PoolSetup s(8, 8, 9, rng);
  const CombineSelection opt = bmf::combine_exact(s.x, s.mask, s.pool, 3);
  bmf::Rng search_rng(1);
  const CombineSelection after =
      bmf::combine_heuristic(s.x, s.mask, s.pool, 3, opt, search_rng);
  CHECK(after.error == opt.error);
  std::vector<std::size_t> a = after.indices, b = opt.indices;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}

TEST_CASE("swap search takes a strictly improving swap") {
  // One factor reproduces x exactly, the other is useless; starting from the
  // useless one, the single possible swap must be found under any seed.
  const Grid xg = {{1, 1, 0}, {1, 1, 0}, {0, 0, 0}};
  const BoolMatrix x = oracle::to_matrix(xg);
  const BoolMatrix mask = BoolMatrix::ones(3, 3);
  FactorPool pool(3, 3);
  pool.add(BitVec::parse("001"), BitVec::parse("001"), 0);  // covers only the zero corner
  pool.add(BitVec::parse("110"), BitVec::parse("110"), 0);  // exact cover
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    bmf::Rng rng(seed);
    const CombineSelection got =
        bmf::combine_heuristic(x, mask, pool, 1, CombineSelection{{0}, 0}, rng);
    CHECK(got.error == 0);
    CHECK(got.indices == std::vector<std::size_t>{1});
  }
}

TEST_CASE("swap search validates its start and parameters") {
  bmf::Rng rng(908);
  PoolSetup s(6, 6, 5, rng);
  bmf::Rng search_rng(1);
  CHECK_THROWS_AS(bmf::combine_heuristic(s.x, s.mask, s.pool, 2, CombineSelection{{0}, 0},
                                         search_rng),
                  std::invalid_argument);  // wrong size
  CHECK_THROWS_AS(bmf::combine_heuristic(s.x, s.mask, s.pool, 2, CombineSelection{{1, 1}, 0},
                                         search_rng),
                  std::invalid_argument);  // duplicate
  CHECK_THROWS_AS(bmf::combine_heuristic(s.x, s.mask, s.pool, 2, CombineSelection{{0, 9}, 0},
                                         search_rng),
                  std::invalid_argument);  // out of range
  bmf::HeurCombParams bad;
  bad.t_max = 0;
  CHECK_THROWS_AS(bmf::combine_heuristic(s.x, s.mask, s.pool, 2, CombineSelection{{0, 1}, 0},
                                         search_rng, bad),
                  std::invalid_argument);
}

TEST_CASE("swap search never loses to its start and never beats the optimum") {
  bmf::Rng rng(909);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PoolSetup s(8, 8, 9, rng, seed % 2 == 0);
    const std::uint64_t opt = oracle::brute_force_combine(s.xg, s.mg, s.raw, 3);
    const CombineSelection start = bmf::greedy_forward_selection(s.x, s.mask, s.pool, 3);
    bmf::Rng search_rng(seed);
    const CombineSelection got =
        bmf::combine_heuristic(s.x, s.mask, s.pool, 3, start, search_rng);
    CHECK(got.error <= start.error);
    CHECK(got.error >= opt);
  }
}

TEST_CASE("greedy forward selection grows by best marginal error") {
  // Factor 0 covers the top-left 2x2 block, factor 1 the bottom-right one,
  // factor 2 duplicates factor 0's coverage but sits at a higher index.
  const Grid xg = {{1, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 1}, {0, 0, 1, 1}};
  const BoolMatrix x = oracle::to_matrix(xg);
  const BoolMatrix mask = BoolMatrix::ones(4, 4);
  FactorPool pool(4, 4);
  pool.add(BitVec::parse("1100"), BitVec::parse("1100"), 0);
  pool.add(BitVec::parse("0011"), BitVec::parse("0011"), 0);
  pool.add(BitVec::parse("1100"), BitVec::parse("1000"), 0);  // partial duplicate of 0

  const CombineSelection got = bmf::greedy_forward_selection(x, mask, pool, 2);
  CHECK(got.error == 0);
  std::vector<std::size_t> sorted = got.indices;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::size_t>{0, 1});

  // Ties go to the lowest index: factors 0 and 2 tie on the first pick of a
  // one-factor selection over only the top half.
  const Grid topg = {{1, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}};
  FactorPool tie_pool(4, 4);
  tie_pool.add(BitVec::parse("1000"), BitVec::parse("1000"), 0);
  tie_pool.add(BitVec::parse("1000"), BitVec::parse("1000"), 0);  // dedup keeps one
  tie_pool.add(BitVec::parse("1100"), BitVec::parse("1000"), 0);
  const CombineSelection tie =
      bmf::greedy_forward_selection(oracle::to_matrix(topg), mask, tie_pool, 1);
  CHECK(tie.indices == std::vector<std::size_t>{0});

  CHECK_THROWS_AS(bmf::greedy_forward_selection(x, mask, pool, 1, {0, 1}),
                  std::invalid_argument);  // base larger than rank
}

TEST_CASE("rebuild pads short selections with dead components") {
  bmf::Rng rng(910);
  PoolSetup s(5, 5, 4, rng);
  const CombineSelection sel{{2, 0}, 0};
  const Factorization f = bmf::rebuild(s.x, s.mask, s.pool, sel, 4);
  CHECK(f.w.cols() == 4);
  CHECK(f.h.rows() == 4);
  CHECK(f.h.row(2).none());
  CHECK(f.h.row(3).none());
  CHECK(f.w.col(0) == s.pool.factor(2).w);
  CHECK(f.h.row(0) == s.pool.factor(2).h);
  CHECK(f.error == oracle::combine_error(s.xg, s.mg, s.raw, sel.indices));
  CHECK(f.method == "combine");
  CHECK(f.trace == std::vector<std::int64_t>{static_cast<std::int64_t>(f.error)});

  CHECK_THROWS_AS(bmf::rebuild(s.x, s.mask, s.pool, CombineSelection{{0, 1, 2}, 0}, 2),
                  std::invalid_argument);
}

TEST_CASE("multi-start with combining never loses to its best gathered run") {
  bmf::Rng data_rng(911);
  for (int rep = 0; rep < 6; ++rep) {
    const BoolMatrix x = oracle::to_matrix(oracle::random_grid(9, 10, data_rng));
    const BoolMatrix mask = BoolMatrix::ones(9, 10);
    bmf::MsCombConfig cfg;
    cfg.ms.max_runs = 3;
    bmf::CombineStats stats;
    bmf::Rng rng(rep);
    const Factorization f = bmf::ms_comb_ao(x, mask, 3, rng, cfg, &stats);
    CHECK(f.error <= stats.best_gathered_error);
    CHECK(f.error == stats.final_error);
    CHECK(stats.runs == 3);
    CHECK(stats.pool_size > 0);
    CHECK(f.method == "ms-comb-ao");
    CHECK(f.error == bmf::masked_sq_error(x, mask, bmf::bool_product(f.w, f.h)));
    CHECK(f.w.cols() == 3);
  }
}

TEST_CASE("multi-start with combining fills an external pool") {
  bmf::Rng data_rng(912);
  const BoolMatrix x = oracle::to_matrix(oracle::random_grid(7, 7, data_rng));
  const BoolMatrix mask = BoolMatrix::ones(7, 7);
  bmf::MsCombConfig cfg;
  cfg.ms.max_runs = 2;
  FactorPool pool(7, 7);
  bmf::Rng rng(4);
  bmf::ms_comb_ao(x, mask, 2, rng, cfg, nullptr, &pool);
  CHECK(pool.size() > 0);
  FactorPool wrong(6, 7);
  bmf::Rng rng2(4);
  CHECK_THROWS_AS(bmf::ms_comb_ao(x, mask, 2, rng2, cfg, nullptr, &wrong),
                  std::invalid_argument);
}

TEST_CASE("the tree orchestrator beats or matches every leaf it ran") {
  bmf::Rng data_rng(913);
  const BoolMatrix x = oracle::to_matrix(oracle::random_grid(10, 10, data_rng));
  const BoolMatrix mask = BoolMatrix::ones(10, 10);

  bmf::TreeConfig cfg;
  cfg.depth = 1;
  cfg.children = 2;
  cfg.leaf_solutions = 2;
  const std::uint64_t seed = 99;
  bmf::CombineStats stats;
  const Factorization f = bmf::tree_bmf(x, mask, 3, seed, cfg, &stats);
  CHECK(f.method == "tree-bmf");
  CHECK(f.seed == seed);
  CHECK(f.error == bmf::masked_sq_error(x, mask, bmf::bool_product(f.w, f.h)));

  // Recompute the two leaves exactly as the tree does and confirm the root
  // result dominates both.
  for (std::size_t c = 0; c < 2; ++c) {
    bmf::MsCombConfig leaf = cfg.node;
    leaf.ms.budget_seconds = 0.0;
    leaf.ms.max_runs = cfg.leaf_solutions;
    bmf::Rng lr(bmf::child_seed(seed, c));
    const Factorization lf = bmf::ms_comb_ao(x, mask, 3, lr, leaf);
    CHECK(f.error <= lf.error);
  }
}

TEST_CASE("tree orchestrator validates its shape") {
  const BoolMatrix x = BoolMatrix::identity(3);
  const BoolMatrix mask = BoolMatrix::ones(3, 3);
  bmf::TreeConfig cfg;
  cfg.depth = 0;
  CHECK_THROWS_AS(bmf::tree_bmf(x, mask, 2, 1, cfg), std::invalid_argument);
  cfg = {};
  cfg.children = 0;
  CHECK_THROWS_AS(bmf::tree_bmf(x, mask, 2, 1, cfg), std::invalid_argument);
  cfg = {};
  cfg.leaf_solutions = 0;
  CHECK_THROWS_AS(bmf::tree_bmf(x, mask, 2, 1, cfg), std::invalid_argument);
}

TEST_CASE("greedy combining solves a planted two-block instance") {
  Grid xg = oracle::make_grid(12, 12);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      xg[i][j] = 1;
      xg[i + 6][j + 6] = 1;
    }
  const BoolMatrix x = oracle::to_matrix(xg);
  const BoolMatrix mask = BoolMatrix::ones(12, 12);

  bmf::GreedyCombConfig cfg;
  cfg.ms.max_runs = 4;
  bmf::CombineStats stats;
  bmf::Rng rng(6);
  const Factorization f = bmf::greedy_comb(x, mask, 2, rng, cfg, &stats);
  CHECK(f.error == 0);
  CHECK(f.method == "greedy-comb");
  CHECK(f.error <= stats.best_gathered_error);
  CHECK(stats.runs == 4);
}

TEST_CASE("the greedy tree orchestrator dominates its calls") {
  bmf::Rng data_rng(914);
  const BoolMatrix x = oracle::to_matrix(oracle::random_grid(10, 9, data_rng));
  const BoolMatrix mask = BoolMatrix::ones(10, 9);

  bmf::GreedyTreeConfig cfg;
  cfg.calls = 3;
  cfg.per_call_budget = 0.0;
  cfg.per_call_runs = 2;
  const std::uint64_t seed = 41;
  bmf::CombineStats stats;
  const Factorization f = bmf::greedy_tree_bmf(x, mask, 3, seed, cfg, &stats);
  CHECK(f.method == "greedy-tree");
  CHECK(f.error <= stats.best_gathered_error);
  CHECK(stats.runs == 3);

  // The recorded best call matches an independent rerun of each call.
  std::uint64_t best_call = ~std::uint64_t{0};
  for (std::size_t c = 0; c < cfg.calls; ++c) {
    bmf::GreedyCombConfig call = cfg.call;
    call.ms.budget_seconds = cfg.per_call_budget;
    call.ms.max_runs = cfg.per_call_runs;
    bmf::Rng cr(bmf::child_seed(seed, c));
    best_call = std::min(best_call, bmf::greedy_comb(x, mask, 3, cr, call).error);
  }
  CHECK(stats.best_gathered_error == best_call);

  bmf::GreedyTreeConfig bad;
  bad.calls = 0;
  CHECK_THROWS_AS(bmf::greedy_tree_bmf(x, mask, 2, 1, bad), std::invalid_argument);
}

TEST_CASE("diversify keeps a selection that already satisfies both rules") {
  // Two topics with plenty of documents and zero overlap.
  Grid xg = oracle::make_grid(6, 24);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 12; ++j) xg[i][j] = 1;
  for (std::size_t i = 3; i < 6; ++i)
    for (std::size_t j = 12; j < 24; ++j) xg[i][j] = 1;
  const BoolMatrix x = oracle::to_matrix(xg);
  const BoolMatrix mask = BoolMatrix::ones(6, 24);

  BoolMatrix w(6, 2), h(2, 24);
  for (std::size_t i = 0; i < 3; ++i) w.set(i, 0);
  for (std::size_t i = 3; i < 6; ++i) w.set(i, 1);
  for (std::size_t j = 0; j < 12; ++j) h.set(0, j);
  for (std::size_t j = 12; j < 24; ++j) h.set(1, j);

  FactorPool pool(6, 24);
  bmf::Rng rng(2);
  const CombineSelection sel = bmf::diversify(x, mask, w, h, pool, 2, rng);
  REQUIRE(sel.indices.size() == 2);
  CHECK(sel.error == 0);
  for (std::size_t idx : sel.indices) CHECK(pool.factor(idx).h.count() == 12);
}

TEST_CASE("diversify evicts topics with too few documents") {
  // Topic 1 has only two documents; the pool holds a better replacement.
  Grid xg = oracle::make_grid(4, 30);
  for (std::size_t j = 0; j < 15; ++j) xg[0][j] = 1;
  for (std::size_t j = 15; j < 30; ++j) xg[1][j] = 1;
  for (std::size_t j = 0; j < 2; ++j) xg[2][j] = 1;
  const BoolMatrix x = oracle::to_matrix(xg);
  const BoolMatrix mask = BoolMatrix::ones(4, 30);

  BoolMatrix w(4, 2), h(2, 30);
  w.set(0, 0);
  for (std::size_t j = 0; j < 15; ++j) h.set(0, j);
  w.set(2, 1);  // rare topic: 2 documents < w_min = 10
  h.set(1, 0);
  h.set(1, 1);

  FactorPool pool(4, 30);
  BitVec alt_w(4), alt_h(30);
  alt_w.set(1);
  for (std::size_t j = 15; j < 30; ++j) alt_h.set(j);
  pool.add(alt_w, alt_h, 0);  // the replacement candidate

  bmf::Rng rng(3);
  const CombineSelection sel = bmf::diversify(x, mask, w, h, pool, 2, rng);
  REQUIRE(sel.indices.size() == 2);
  for (std::size_t idx : sel.indices) CHECK(pool.factor(idx).h.count() >= 10);
  CHECK(sel.error == 2);  // only the rare topic's two documents stay uncovered
}

TEST_CASE("diversify evicts a topic dominated by overlap") {
  // Topics share all their documents; one must go. The pool offers a
  // disjoint replacement so the survivor pair passes both rules.
  Grid xg = oracle::make_grid(4, 40);
  for (std::size_t j = 0; j < 20; ++j) {
    xg[0][j] = 1;
    xg[1][j] = 1;
  }
  for (std::size_t j = 20; j < 40; ++j) xg[2][j] = 1;
  const BoolMatrix x = oracle::to_matrix(xg);
  const BoolMatrix mask = BoolMatrix::ones(4, 40);

  BoolMatrix w(4, 2), h(2, 40);
  w.set(0, 0);
  w.set(1, 1);
  for (std::size_t j = 0; j < 20; ++j) {
    h.set(0, j);
    h.set(1, j);  // identical document sets: full overlap
  }

  FactorPool pool(4, 40);
  BitVec alt_w(4), alt_h(40);
  alt_w.set(2);
  for (std::size_t j = 20; j < 40; ++j) alt_h.set(j);
  pool.add(alt_w, alt_h, 0);

  bmf::Rng rng(4);
  const CombineSelection sel = bmf::diversify(x, mask, w, h, pool, 2, rng);
  REQUIRE(sel.indices.size() == 2);
  // final Gram: diagonals 20 and 20, off-diagonal 0
  const BitVec& h0 = pool.factor(sel.indices[0]).h;
  const BitVec& h1 = pool.factor(sel.indices[1]).h;
  CHECK(bmf::and_count(h0, h1) == 0);
  CHECK(h0.count() == 20);
  CHECK(h1.count() == 20);
}

TEST_CASE("diversify stops fighting when the pool runs dry") {
  // Dropping below rank-many active factors ends the loop with what is left.
  const BoolMatrix x = oracle::to_matrix({{1, 0}, {0, 0}});
  const BoolMatrix mask = BoolMatrix::ones(2, 2);
  BoolMatrix w(2, 1), h(1, 2);
  w.set(0, 0);
  h.set(0, 0);  // one document < w_min, and nothing to replace it with

  FactorPool pool(2, 2);
  bmf::Rng rng(5);
  const CombineSelection sel = bmf::diversify(x, mask, w, h, pool, 1, rng);
  CHECK(sel.indices.size() == 1);  // the lone factor survives by default

  bmf::Rng rng2(5);
  FactorPool pool2(2, 2);
  CHECK_THROWS_AS(bmf::diversify(x, mask, w, h, pool2, 0, rng2), std::invalid_argument);
}
