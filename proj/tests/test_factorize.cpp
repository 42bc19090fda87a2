#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "factorize.hpp"
#include "oracles.hpp"

using bmf::AOConfig;
using bmf::Backend;
using bmf::BoolMatrix;
using bmf::Factorization;
using bmf::InitStrategy;
using bmf::MsConfig;
using oracle::Grid;

namespace {

// Exhaustive optimum for tiny instances: enumerate every W and solve H
// column by column exactly, which is optimal for fixed W.
std::uint64_t brute_force_bmf(const BoolMatrix& x, const BoolMatrix& mask, std::size_t rank) {
  const std::size_t m = x.rows();
  REQUIRE(m * rank <= 16);
  std::uint64_t best = ~std::uint64_t{0};
  for (unsigned long bits = 0; bits < (1ul << (m * rank)); ++bits) {
    BoolMatrix w(m, rank);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < rank; ++k)
        if ((bits >> (i * rank + k)) & 1ul) w.set(i, k);
    std::uint64_t err = 0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      bmf::BoolLSInstance inst(w, x.col(j), mask.col(j));
      err += bmf::solve_exact(inst).error;
    }
    best = std::min(best, err);
  }
  return best;
}

void check_trace_shape(const Factorization& f, const BoolMatrix& x) {
  REQUIRE(f.trace.size() >= 3);
  CHECK(f.trace[0] == static_cast<std::int64_t>(x.ones_count()));
  CHECK(f.trace[1] == f.trace[0] - 1);
  for (std::size_t t = 3; t < f.trace.size(); ++t) CHECK(f.trace[t] < f.trace[t - 1]);
  CHECK(f.trace.back() == static_cast<std::int64_t>(f.error));
  CHECK(f.sweeps == f.trace.size() - 2);
}

}  // namespace

TEST_CASE("random column and row starts draw real slices of the data") {
  // Distinct columns so a drawn column identifies its index uniquely.
  const BoolMatrix x = oracle::to_matrix({{1, 0, 0, 1}, {0, 1, 0, 1}, {0, 0, 1, 0}});
  bmf::Rng rng(42);

  const BoolMatrix w = bmf::init_random_selection(x, 4, true, rng);
  REQUIRE(w.rows() == 3);
  REQUIRE(w.cols() == 4);
  std::multiset<std::string> got, want;
  for (std::size_t k = 0; k < 4; ++k) {
    got.insert(w.col(k).to_string());
    want.insert(x.col(k).to_string());
  }
  CHECK(got == want);  // all columns drawn, each exactly once

  const BoolMatrix h = bmf::init_random_selection(x, 2, false, rng);
  REQUIRE(h.rows() == 2);
  REQUIRE(h.cols() == 4);
  std::set<std::string> rows_of_x;
  for (std::size_t i = 0; i < 3; ++i) rows_of_x.insert(x.row(i).to_string());
  CHECK(rows_of_x.count(h.row(0).to_string()) == 1);
  CHECK(rows_of_x.count(h.row(1).to_string()) == 1);
  CHECK(h.row(0) != h.row(1));
}

TEST_CASE("random starts are validated and deterministic") {
  const BoolMatrix x = BoolMatrix::identity(3);
  bmf::Rng a(7), b(7);
  CHECK(bmf::init_random_selection(x, 2, true, a) == bmf::init_random_selection(x, 2, true, b));
  bmf::Rng c(8);
  CHECK_THROWS_AS(bmf::init_random_selection(x, 4, true, c), std::invalid_argument);
  CHECK_THROWS_AS(bmf::init_random_selection(x, 0, true, c), std::invalid_argument);
}

TEST_CASE("nmf start recovers a planted rank-one support") {
  // x is exactly w h for one component, so the multiplicative updates can
  // drive the residual to zero and the thresholded support is unambiguous.
  const Grid wg = {{1}, {1}, {1}, {0}, {0}};
  const Grid hg = {{1, 1, 0, 1}};
  const Grid xg = oracle::product(wg, hg);
  const BoolMatrix x = oracle::to_matrix(xg);
  const BoolMatrix mask = BoolMatrix::ones(5, 4);

  bmf::InitConfig cfg;
  cfg.nmf_iters = 400;
  cfg.delta_override = 0.5;
  bmf::Rng rng(3);
  const auto [w0, h0] = bmf::init_nmf(x, mask, 1, cfg, rng);
  CHECK(oracle::to_grid(w0) == wg);
  CHECK(oracle::to_grid(h0) == hg);
}

TEST_CASE("nmf start is deterministic and honours the threshold override") {
  bmf::Rng data_rng(99);
  const BoolMatrix x = oracle::to_matrix(oracle::random_grid(8, 6, data_rng));
  const BoolMatrix mask = BoolMatrix::ones(8, 6);

  bmf::InitConfig cfg;
  cfg.delta_override = 0.5;
  bmf::Rng a(11), b(11);
  const auto [w1, h1] = bmf::init_nmf(x, mask, 3, cfg, a);
  const auto [w2, h2] = bmf::init_nmf(x, mask, 3, cfg, b);
  CHECK(w1 == w2);
  CHECK(h1 == h2);

  // An absurdly high threshold blanks the factors; a tiny one keeps at
  // least as much as any higher one.
  bmf::InitConfig high = cfg;
  high.delta_override = 1e9;
  bmf::Rng c(11);
  const auto [w3, h3] = bmf::init_nmf(x, mask, 3, high, c);
  CHECK(w3.ones_count() == 0);
  CHECK(h3.ones_count() == 0);

  bmf::InitConfig low = cfg;
  low.delta_override = 1e-30;
  bmf::Rng d(11);
  const auto [w4, h4] = bmf::init_nmf(x, mask, 3, low, d);
  CHECK(w4.ones_count() >= w1.ones_count());
  CHECK(h4.ones_count() >= h1.ones_count());
}

TEST_CASE("alternating optimization on an all-zero matrix terminates at zero") {
  const BoolMatrix x(3, 4);
  const BoolMatrix mask = BoolMatrix::ones(3, 4);
  bmf::Rng rng(1);
  const Factorization f = bmf::ao_bmf(x, mask, BoolMatrix(3, 2), rng);
  CHECK(f.error == 0);
  CHECK(f.trace == std::vector<std::int64_t>{0, -1, 0});
  CHECK(f.sweeps == 1);
  CHECK(bmf::bool_product(f.w, f.h).ones_count() == 0);
}

TEST_CASE("alternating optimization solves a diagonal in one sweep") {
  // Anti-diagonal, full rank, started from the data itself.
  const std::size_t n = 5;
  BoolMatrix x(n, n);
  for (std::size_t i = 0; i < n; ++i) x.set(i, n - 1 - i);
  bmf::Rng rng(1);
  const Factorization f = bmf::ao_bmf(x, BoolMatrix::ones(n, n), x, rng);
  CHECK(f.error == 0);
  CHECK(f.sweeps == 1);
  CHECK(bmf::bool_product(f.w, f.h) == x);
  check_trace_shape(f, x);
}

TEST_CASE("a planted factorization is a fixed point of the sweep") {
  const Grid wg = {{1, 0}, {1, 0}, {0, 1}, {0, 1}, {1, 1}};
  const Grid hg = {{1, 1, 0, 0, 0, 1}, {0, 0, 1, 1, 0, 1}};
  const BoolMatrix x = oracle::to_matrix(oracle::product(wg, hg));
  bmf::Rng rng(5);
  const Factorization f = bmf::ao_bmf(x, BoolMatrix::ones(5, 6), oracle::to_matrix(wg), rng);
  CHECK(f.error == 0);
  CHECK(bmf::bool_product(f.w, f.h) == x);
}

TEST_CASE("the sweep revives dead components instead of wasting rank") {
  // Start with one useful column and one all-zero column; the revival step
  // reseeds the dead component from the residual and the identity splits
  // perfectly.
  const BoolMatrix x = BoolMatrix::identity(2);
  const BoolMatrix w0 = oracle::to_matrix({{1, 0}, {0, 0}});
  bmf::Rng rng(1);
  const Factorization f = bmf::ao_bmf(x, BoolMatrix::ones(2, 2), w0, rng);
  CHECK(f.error == 0);
  CHECK(bmf::bool_product(f.w, f.h) == x);
}

TEST_CASE("alternating optimization validates its inputs") {
  const BoolMatrix x = BoolMatrix::identity(3);
  const BoolMatrix mask = BoolMatrix::ones(3, 3);
  bmf::Rng rng(1);
  CHECK_THROWS_AS(bmf::ao_bmf(x, BoolMatrix::ones(2, 3), BoolMatrix(3, 1), rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(bmf::ao_bmf(x, mask, BoolMatrix(2, 1), rng), std::invalid_argument);
  CHECK_THROWS_AS(bmf::ao_bmf(x, mask, BoolMatrix(3, 0), rng), std::invalid_argument);
  AOConfig zero_iters;
  zero_iters.maxiter = 0;
  CHECK_THROWS_AS(bmf::ao_bmf(x, mask, BoolMatrix(3, 1), rng, zero_iters), std::invalid_argument);
  AOConfig cfg;  // exact backend
  CHECK_THROWS_AS(bmf::ao_bmf(x, mask, BoolMatrix(3, 21), rng, cfg), bmf::capability_error);
}

TEST_CASE("error traces are well formed for both backends") {
  bmf::Rng data_rng(2024);
  for (int rep = 0; rep < 12; ++rep) {
    const Grid xg = oracle::random_grid(8 + data_rng.below(6), 8 + data_rng.below(6), data_rng);
    const BoolMatrix x = oracle::to_matrix(xg);
    const BoolMatrix mask = rep % 2 ? oracle::to_matrix(oracle::random_grid(
                                          x.rows(), x.cols(), data_rng, 0.8))
                                    : BoolMatrix::ones(x.rows(), x.cols());
    AOConfig cfg;
    cfg.backend = rep % 3 == 0 ? Backend::greedy_ls : Backend::exact;
    bmf::Rng rng(rep);
    const BoolMatrix w0 = bmf::init_random_selection(x, 3, true, rng);
    const Factorization f = bmf::ao_bmf(x, mask, w0, rng, cfg);
    check_trace_shape(f, x);
    CHECK(f.error == bmf::masked_sq_error(x, mask, bmf::bool_product(f.w, f.h)));
  }
}

TEST_CASE("single-run multi-start equals a direct solve with the same seed") {
  const BoolMatrix x = oracle::to_matrix(oracle::product({{1, 0}, {1, 1}, {0, 1}, {1, 0}},
                                                         {{1, 0, 1, 0, 1}, {0, 1, 1, 1, 0}}));
  const BoolMatrix mask = BoolMatrix::ones(4, 5);

  bmf::Rng direct_rng(17);
  const BoolMatrix w0 = bmf::init_random_selection(x, 2, true, direct_rng);
  const Factorization direct = bmf::ao_bmf(x, mask, w0, direct_rng);

  MsConfig cfg;
  cfg.init.strategy = InitStrategy::random_columns;
  bmf::Rng ms_rng(17);
  const Factorization ms = bmf::ms_ao(x, mask, 2, ms_rng, cfg);
  CHECK(ms.error == direct.error);
  CHECK(ms.w == direct.w);
  CHECK(ms.h == direct.h);
  CHECK(ms.method == "ms-ao");
}

TEST_CASE("multi-start returns the best observed run") {
  bmf::Rng data_rng(31);
  const BoolMatrix x = oracle::to_matrix(oracle::random_grid(9, 11, data_rng));
  const BoolMatrix mask = BoolMatrix::ones(9, 11);

  MsConfig cfg;
  cfg.max_runs = 6;
  std::vector<std::uint64_t> seen;
  bmf::MsStats stats;
  bmf::Rng rng(5);
  const Factorization best = bmf::ms_ao(x, mask, 3, rng, cfg, &stats,
                                        [&](const Factorization& f, std::size_t run) {
                                          CHECK(run == seen.size());
                                          seen.push_back(f.error);
                                        });
  REQUIRE(seen.size() == 6);
  CHECK(stats.runs == 6);
  CHECK(best.error == *std::min_element(seen.begin(), seen.end()));
  CHECK(stats.best_error == best.error);
}

TEST_CASE("multi-start rejects a random start on incomplete data") {
  const BoolMatrix x = BoolMatrix::identity(4);
  BoolMatrix mask = BoolMatrix::ones(4, 4);
  mask.set(0, 1, false);
  bmf::Rng rng(1);
  MsConfig cfg;
  cfg.init.strategy = InitStrategy::random_columns;
  CHECK_THROWS_AS(bmf::ms_ao(x, mask, 2, rng, cfg), std::invalid_argument);
  cfg.init.strategy = InitStrategy::random_rows;
  CHECK_THROWS_AS(bmf::ms_ao(x, mask, 2, rng, cfg), std::invalid_argument);

  // the adaptive schedule falls back to the nmf start and runs fine
  cfg.init.strategy = InitStrategy::alternate;
  cfg.max_runs = 2;
  const Factorization f = bmf::ms_ao(x, mask, 2, rng, cfg);
  CHECK(f.error <= x.ones_count());
  CHECK_THROWS_AS(bmf::ms_ao(x, mask, 0, rng, cfg), std::invalid_argument);
}

TEST_CASE("row-based starts solve the transposed problem and flip back") {
  bmf::Rng data_rng(77);
  const BoolMatrix x = oracle::to_matrix(oracle::random_grid(7, 9, data_rng));
  const BoolMatrix mask = BoolMatrix::ones(7, 9);
  MsConfig cfg;
  cfg.init.strategy = InitStrategy::random_rows;
  cfg.max_runs = 3;
  bmf::Rng rng(9);
  const Factorization f = bmf::ms_ao(x, mask, 3, rng, cfg);
  CHECK(f.w.rows() == 7);
  CHECK(f.w.cols() == 3);
  CHECK(f.h.rows() == 3);
  CHECK(f.h.cols() == 9);
  CHECK(f.error == bmf::masked_sq_error(x, mask, bmf::bool_product(f.w, f.h)));
}

TEST_CASE("enough random restarts reach the exhaustive optimum") {
  bmf::Rng data_rng(123);
  const BoolMatrix x = oracle::to_matrix(oracle::random_grid(6, 6, data_rng));
  const BoolMatrix mask = BoolMatrix::ones(6, 6);
  const std::uint64_t opt = brute_force_bmf(x, mask, 2);

  MsConfig cfg;
  cfg.init.strategy = InitStrategy::random_columns;
  cfg.max_runs = 20;
  bmf::Rng rng(2);
  const Factorization f = bmf::ms_ao(x, mask, 2, rng, cfg);
  CHECK(f.error == opt);
}
