#include "bmf.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "bench.hpp"
#include "combine.hpp"
#include "dataio.hpp"

struct bmf_matrix {
  bmf::BoolMatrix m;
};

struct bmf_dataset {
  bmf::Dataset d;
};

struct bmf_result {
  bmf::Factorization f;
  double time_s = 0.0;
  double rel_err = 0.0;
};

struct bmf_topics {
  std::uint64_t error = 0;
  std::vector<std::uint64_t> sizes;
  std::vector<std::vector<bmf::TopicWord>> words;
};

struct bmf_pool {
  bmf::FactorPool p;
};

struct bmf_combine_result {
  std::vector<std::size_t> indices;
  std::vector<bmf::RankOneFactor> factors;  // copies of the selected factors
  std::size_t rows = 0, cols = 0;
  std::uint64_t error = 0;
  bool used_exact = false;
};

struct bmf_reference {
  bmf::ReferenceTable t;
};

struct bmf_report {
  std::vector<bmf::ReportRow> rows;
};

namespace {

thread_local std::string g_last_error = "";

bmf_status fail(bmf_status s, const std::string& what) {
  g_last_error = what;
  return s;
}

template <class F>
bmf_status guarded(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    return fail(BMF_ERR_INVALID_ARGUMENT, e.what());
  } catch (const bmf::capability_error& e) {
    return fail(BMF_ERR_CAPABILITY, e.what());
  } catch (const bmf::io_error& e) {
    return fail(BMF_ERR_IO, e.what());
  } catch (const std::runtime_error& e) {
    return fail(BMF_ERR_PARSE, e.what());
  } catch (const std::exception& e) {
    return fail(BMF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BMF_ERR_INTERNAL, "unknown error");
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

bmf::AOConfig ao_config(const bmf_params& p) {
  bmf::AOConfig c;
  require(p.backend == BMF_BACKEND_EXACT || p.backend == BMF_BACKEND_GREEDY,
          "unknown backend value");
  c.backend = p.backend == BMF_BACKEND_EXACT ? bmf::Backend::exact : bmf::Backend::greedy_ls;
  c.maxiter = p.maxiter;
  c.exact_rank_limit = p.exact_rank_limit;
  c.ls.t = p.ls_t;
  c.ls.q_max = p.ls_q_max;
  return c;
}

bmf::InitConfig init_config(const bmf_params& p) {
  bmf::InitConfig c;
  switch (p.init) {
    case BMF_INIT_ALTERNATE: c.strategy = bmf::InitStrategy::alternate; break;
    case BMF_INIT_RANDOM_COLUMNS: c.strategy = bmf::InitStrategy::random_columns; break;
    case BMF_INIT_RANDOM_ROWS: c.strategy = bmf::InitStrategy::random_rows; break;
    case BMF_INIT_NMF: c.strategy = bmf::InitStrategy::nmf; break;
    default: throw std::invalid_argument("unknown init strategy value");
  }
  c.nmf_iters = p.nmf_iters;
  return c;
}

bmf::MsConfig ms_config(const bmf_params& p) {
  bmf::MsConfig c;
  c.ao = ao_config(p);
  c.init = init_config(p);
  c.budget_seconds = p.budget_seconds;
  c.max_runs = p.max_runs;
  return c;
}

bmf::HeurCombParams heur_config(const bmf_params& p) {
  bmf::HeurCombParams h;
  h.t_max = p.heur_t_max;
  h.n_trials = p.heur_n_trials;
  h.budget_seconds = 0.0;
  return h;
}

bmf::MsCombConfig ms_comb_config(const bmf_params& p) {
  bmf::MsCombConfig c;
  c.ms = ms_config(p);
  c.heur = heur_config(p);
  c.exact_combine_limit = p.exact_combine_limit;
  return c;
}

bmf::Factorization run_method(const bmf::Dataset& d, const bmf_params& p) {
  require(p.rank >= 1, "rank must be at least 1");
  bmf::Rng rng(p.seed);
  bmf::Factorization f;
  switch (p.method) {
    case BMF_METHOD_MS_AO:
      f = bmf::ms_ao(d.x, d.mask, p.rank, rng, ms_config(p));
      break;
    case BMF_METHOD_MS_COMB_AO:
      f = bmf::ms_comb_ao(d.x, d.mask, p.rank, rng, ms_comb_config(p));
      break;
    case BMF_METHOD_TREE: {
      bmf::TreeConfig tc;
      tc.depth = p.tree_depth;
      tc.children = p.tree_children;
      tc.leaf_solutions = p.leaf_solutions;
      tc.node = ms_comb_config(p);
      f = bmf::tree_bmf(d.x, d.mask, p.rank, p.seed, tc);
      break;
    }
    case BMF_METHOD_GREEDY_COMB: {
      bmf::GreedyCombConfig gc;
      gc.ms = ms_config(p);
      gc.heur = heur_config(p);
      f = bmf::greedy_comb(d.x, d.mask, p.rank, rng, gc);
      break;
    }
    case BMF_METHOD_GREEDY_TREE: {
      bmf::GreedyTreeConfig gt;
      gt.calls = p.calls;
      gt.per_call_budget = p.per_call_budget;
      gt.per_call_runs = p.per_call_runs;
      gt.call.ms = ms_config(p);
      gt.call.heur = heur_config(p);
      gt.heur = heur_config(p);
      f = bmf::greedy_tree_bmf(d.x, d.mask, p.rank, p.seed, gt);
      break;
    }
    default: throw std::invalid_argument("unknown method value");
  }
  f.seed = p.seed;
  return f;
}

std::uint64_t observed_ones(const bmf::Dataset& d) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < d.x.rows(); ++i) c += bmf::and_count(d.mask.row(i), d.x.row(i));
  return c;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* bmf_last_error(void) { return g_last_error.c_str(); }

const char* bmf_version(void) { return "1.0.0"; }

uint64_t bmf_child_seed(uint64_t base, uint64_t index) { return bmf::child_seed(base, index); }

/* ---- matrices ---- */

bmf_status bmf_matrix_create(size_t rows, size_t cols, bmf_matrix** out) {
  return guarded([&]() -> bmf_status {
    require(out != nullptr, "out must not be NULL");
    *out = new bmf_matrix{bmf::BoolMatrix(rows, cols)};
    return BMF_OK;
  });
}

bmf_status bmf_matrix_from_bits(size_t rows, size_t cols, const uint8_t* row_major,
                                bmf_matrix** out) {
  return guarded([&]() -> bmf_status {
    require(out != nullptr, "out must not be NULL");
    require(row_major != nullptr || rows * cols == 0, "row_major must not be NULL");
    bmf::BoolMatrix m(rows, cols);
    for (size_t i = 0; i < rows; ++i)
      for (size_t j = 0; j < cols; ++j)
        if (row_major[i * cols + j]) m.set(i, j);
    *out = new bmf_matrix{std::move(m)};
    return BMF_OK;
  });
}

void bmf_matrix_destroy(bmf_matrix* m) { delete m; }

size_t bmf_matrix_rows(const bmf_matrix* m) { return m ? m->m.rows() : 0; }
size_t bmf_matrix_cols(const bmf_matrix* m) { return m ? m->m.cols() : 0; }

int bmf_matrix_get(const bmf_matrix* m, size_t i, size_t j) {
  if (!m || i >= m->m.rows() || j >= m->m.cols()) return -1;
  return m->m.get(i, j) ? 1 : 0;
}

bmf_status bmf_matrix_set(bmf_matrix* m, size_t i, size_t j, int value) {
  return guarded([&]() -> bmf_status {
    require(m != nullptr, "matrix must not be NULL");
    require(i < m->m.rows() && j < m->m.cols(), "matrix index out of range");
    m->m.set(i, j, value != 0);
    return BMF_OK;
  });
}

uint64_t bmf_matrix_ones(const bmf_matrix* m) { return m ? m->m.ones_count() : 0; }

bmf_status bmf_bool_product(const bmf_matrix* w, const bmf_matrix* h, bmf_matrix** out) {
  return guarded([&]() -> bmf_status {
    require(w && h && out, "arguments must not be NULL");
    *out = new bmf_matrix{bmf::bool_product(w->m, h->m)};
    return BMF_OK;
  });
}

bmf_status bmf_masked_sq_error(const bmf_matrix* x, const bmf_matrix* mask, const bmf_matrix* a,
                               uint64_t* out) {
  return guarded([&]() -> bmf_status {
    require(x && mask && a && out, "arguments must not be NULL");
    *out = bmf::masked_sq_error(x->m, mask->m, a->m);
    return BMF_OK;
  });
}

/* ---- datasets ---- */

bmf_status bmf_dataset_load(const char* path, bmf_dataset** out) {
  return guarded([&]() -> bmf_status {
    require(path && out, "arguments must not be NULL");
    *out = new bmf_dataset{bmf::load_dataset(path)};
    return BMF_OK;
  });
}

bmf_status bmf_dataset_save(const bmf_dataset* d, const char* path) {
  return guarded([&]() -> bmf_status {
    require(d && path, "arguments must not be NULL");
    bmf::save_dataset(d->d, path);
    return BMF_OK;
  });
}

bmf_status bmf_dataset_load_real(const char* path, bmf_binarize_policy policy, double threshold,
                                 bmf_dataset** out) {
  return guarded([&]() -> bmf_status {
    require(path && out, "arguments must not be NULL");
    bmf::BinarizePolicy pol;
    switch (policy) {
      case BMF_BINARIZE_ROUND: pol = bmf::BinarizePolicy::round; break;
      case BMF_BINARIZE_NONZERO: pol = bmf::BinarizePolicy::nonzero; break;
      case BMF_BINARIZE_MEAN: pol = bmf::BinarizePolicy::mean_per_column; break;
      case BMF_BINARIZE_MEDIAN: pol = bmf::BinarizePolicy::median_per_column; break;
      case BMF_BINARIZE_FIXED: pol = bmf::BinarizePolicy::fixed; break;
      default: throw std::invalid_argument("unknown binarize policy value");
    }
    bmf::RealMatrix rm = bmf::load_dense_real_file(path);
    bmf::Dataset d;
    d.x = bmf::binarize(rm, pol, threshold);
    d.mask = rm.mask;
    d.row_labels = std::move(rm.row_labels);
    d.col_labels = std::move(rm.col_labels);
    const std::string p(path);
    const auto slash = p.find_last_of("/\\");
    std::string base = slash == std::string::npos ? p : p.substr(slash + 1);
    const auto dot = base.find_last_of('.');
    if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
    d.name = base;
    *out = new bmf_dataset{std::move(d)};
    return BMF_OK;
  });
}

bmf_status bmf_dataset_from_matrix(const bmf_matrix* x, const bmf_matrix* mask,
                                   bmf_dataset** out) {
  return guarded([&]() -> bmf_status {
    require(x && out, "arguments must not be NULL");
    bmf::Dataset d;
    d.x = x->m;
    if (mask) {
      require(mask->m.rows() == x->m.rows() && mask->m.cols() == x->m.cols(),
              "mask shape mismatch");
      d.mask = mask->m;
      // A hidden entry carries no value; keep the convention x = 0 there.
      for (std::size_t i = 0; i < d.x.rows(); ++i)
        for (std::size_t j = 0; j < d.x.cols(); ++j)
          if (!d.mask.get(i, j)) d.x.set(i, j, false);
    } else {
      d.mask = bmf::BoolMatrix::ones(x->m.rows(), x->m.cols());
    }
    d.name = "matrix";
    *out = new bmf_dataset{std::move(d)};
    return BMF_OK;
  });
}

void bmf_dataset_destroy(bmf_dataset* d) { delete d; }

size_t bmf_dataset_rows(const bmf_dataset* d) { return d ? d->d.x.rows() : 0; }
size_t bmf_dataset_cols(const bmf_dataset* d) { return d ? d->d.x.cols() : 0; }
int bmf_dataset_complete(const bmf_dataset* d) { return d && d->d.complete() ? 1 : 0; }
uint64_t bmf_dataset_ones(const bmf_dataset* d) { return d ? observed_ones(d->d) : 0; }
const char* bmf_dataset_name(const bmf_dataset* d) { return d ? d->d.name.c_str() : ""; }

bmf_status bmf_dataset_set_name(bmf_dataset* d, const char* name) {
  return guarded([&]() -> bmf_status {
    require(d && name, "arguments must not be NULL");
    d->d.name = name;
    return BMF_OK;
  });
}

const char* bmf_dataset_row_label(const bmf_dataset* d, size_t i) {
  if (!d || i >= d->d.row_labels.size()) return "";
  return d->d.row_labels[i].c_str();
}

/* ---- factorization ---- */

void bmf_params_init(bmf_params* p) {
  if (!p) return;
  p->rank = 1;
  p->seed = 0;
  p->method = BMF_METHOD_MS_AO;
  p->backend = BMF_BACKEND_EXACT;
  p->init = BMF_INIT_ALTERNATE;
  p->budget_seconds = 0.0;
  p->max_runs = 0;
  p->maxiter = 100;
  p->exact_rank_limit = 20;
  p->ls_t = 0;
  p->ls_q_max = 0;
  p->nmf_iters = 200;
  p->heur_t_max = 100;
  p->heur_n_trials = 1000;
  p->exact_combine_limit = 25;
  p->tree_depth = 1;
  p->tree_children = 2;
  p->leaf_solutions = 5;
  p->calls = 3;
  p->per_call_budget = 10.0;
  p->per_call_runs = 0;
}

bmf_status bmf_run(const bmf_dataset* d, const bmf_params* p, bmf_result** out) {
  return guarded([&]() -> bmf_status {
    require(d && p && out, "arguments must not be NULL");
    const auto t0 = std::chrono::steady_clock::now();
    bmf::Factorization f = run_method(d->d, *p);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto* r = new bmf_result{std::move(f), secs, 0.0};
    const std::uint64_t ones = observed_ones(d->d);
    if (ones > 0)
      r->rel_err = std::sqrt(static_cast<double>(r->f.error)) /
                   std::sqrt(static_cast<double>(ones));
    *out = r;
    return BMF_OK;
  });
}

void bmf_result_destroy(bmf_result* r) { delete r; }

uint64_t bmf_result_error(const bmf_result* r) { return r ? r->f.error : 0; }
double bmf_result_relative_error(const bmf_result* r) { return r ? r->rel_err : 0.0; }
size_t bmf_result_rank(const bmf_result* r) { return r ? r->f.w.cols() : 0; }
double bmf_result_time_seconds(const bmf_result* r) { return r ? r->time_s : 0.0; }
const char* bmf_result_method(const bmf_result* r) { return r ? r->f.method.c_str() : ""; }

bmf_status bmf_result_factors(const bmf_result* r, bmf_matrix** w, bmf_matrix** h) {
  return guarded([&]() -> bmf_status {
    require(r && w && h, "arguments must not be NULL");
    *w = new bmf_matrix{r->f.w};
    *h = new bmf_matrix{r->f.h};
    return BMF_OK;
  });
}

size_t bmf_result_trace_len(const bmf_result* r) { return r ? r->f.trace.size() : 0; }

int64_t bmf_result_trace_get(const bmf_result* r, size_t i) {
  if (!r || i >= r->f.trace.size()) return 0;
  return r->f.trace[i];
}

/* ---- topics ---- */

bmf_status bmf_topics_run(const bmf_dataset* d, const bmf_params* p, size_t top_k,
                          int diversify, uint64_t w_min, uint64_t ratio, bmf_topics** out) {
  return guarded([&]() -> bmf_status {
    require(d && p && out, "arguments must not be NULL");
    require(top_k >= 1, "top_k must be at least 1");
    bmf::Factorization f = run_method(d->d, *p);

    bmf::BoolMatrix w = f.w, h = f.h;
    if (diversify) {
      bmf::FactorPool pool(d->d.x.rows(), d->d.x.cols());
      bmf::Rng dr(bmf::child_seed(p->seed, 0x0D15EA5Eull));
      bmf::DiversifyParams dp;
      dp.w_min = w_min;
      dp.ratio = ratio;
      dp.heur.t_max = p->heur_t_max;
      dp.heur.n_trials = p->heur_n_trials;
      bmf::CombineSelection sel =
          bmf::diversify(d->d.x, d->d.mask, f.w, f.h, pool, p->rank, dr, dp);
      // Keep exactly the selected topics, no padding.
      w = bmf::BoolMatrix(d->d.x.rows(), sel.indices.size());
      h = bmf::BoolMatrix(sel.indices.size(), d->d.x.cols());
      for (std::size_t t = 0; t < sel.indices.size(); ++t) {
        const bmf::RankOneFactor& fac = pool.factor(sel.indices[t]);
        fac.w.for_each_set([&](std::size_t i) { w.set(i, t); });
        h.set_row(t, fac.h);
      }
    }

    std::vector<std::string> labels = d->d.row_labels;
    if (labels.empty()) {
      labels.resize(d->d.x.rows());
      for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = std::to_string(i);
    }
    const bmf::TopicImportance imp = bmf::topic_importance(d->d.x, w, h);
    auto* t = new bmf_topics;
    t->words = bmf::top_words(imp, w, top_k, labels);
    t->error = bmf::masked_sq_error(d->d.x, d->d.mask, bmf::bool_product(w, h));
    t->sizes.resize(h.rows());
    for (std::size_t k = 0; k < h.rows(); ++k) t->sizes[k] = h.row(k).count();
    *out = t;
    return BMF_OK;
  });
}

void bmf_topics_destroy(bmf_topics* t) { delete t; }

size_t bmf_topics_count(const bmf_topics* t) { return t ? t->words.size() : 0; }
uint64_t bmf_topics_error(const bmf_topics* t) { return t ? t->error : 0; }

uint64_t bmf_topics_size(const bmf_topics* t, size_t topic) {
  if (!t || topic >= t->sizes.size()) return 0;
  return t->sizes[topic];
}

size_t bmf_topics_word_count(const bmf_topics* t, size_t topic) {
  if (!t || topic >= t->words.size()) return 0;
  return t->words[topic].size();
}

const char* bmf_topics_word(const bmf_topics* t, size_t topic, size_t i) {
  if (!t || topic >= t->words.size() || i >= t->words[topic].size()) return "";
  return t->words[topic][i].label.c_str();
}

uint32_t bmf_topics_word_weight(const bmf_topics* t, size_t topic, size_t i) {
  if (!t || topic >= t->words.size() || i >= t->words[topic].size()) return 0;
  return t->words[topic][i].count;
}

/* ---- factor pools and combining ---- */

bmf_status bmf_pool_create(size_t rows, size_t cols, bmf_pool** out) {
  return guarded([&]() -> bmf_status {
    require(out != nullptr, "out must not be NULL");
    *out = new bmf_pool{bmf::FactorPool(rows, cols)};
    return BMF_OK;
  });
}

void bmf_pool_destroy(bmf_pool* p) { delete p; }

size_t bmf_pool_size(const bmf_pool* p) { return p ? p->p.size() : 0; }
size_t bmf_pool_rows(const bmf_pool* p) { return p ? p->p.rows() : 0; }
size_t bmf_pool_cols(const bmf_pool* p) { return p ? p->p.cols() : 0; }

bmf_status bmf_pool_add_factors(bmf_pool* p, const bmf_matrix* w, const bmf_matrix* h) {
  return guarded([&]() -> bmf_status {
    require(p && w && h, "arguments must not be NULL");
    require(w->m.cols() == h->m.rows(), "factor widths disagree");
    require(w->m.rows() == p->p.rows() && h->m.cols() == p->p.cols(),
            "factor shapes do not match the pool");
    for (std::size_t k = 0; k < w->m.cols(); ++k)
      p->p.add(w->m.col_copy(k), h->m.row(k), 0);
    return BMF_OK;
  });
}

bmf_status bmf_pool_load(const char* path, bmf_pool** out) {
  return guarded([&]() -> bmf_status {
    require(path && out, "arguments must not be NULL");
    std::ifstream in(path);
    if (!in) throw bmf::io_error(std::string(path) + ": cannot open for reading");
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    std::size_t m = 0, n = 0;
    bmf::FactorPool pool(0, 0);
    auto fail_at = [&](const std::string& msg) -> std::runtime_error {
      return std::runtime_error(std::string(path) + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
      ++lineno;
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
        line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      if (!have_header) {
        std::string extra;
        if (!(ls >> m >> n) || (ls >> extra)) throw fail_at("expected a 'rows cols' header");
        if (m == 0 || n == 0) throw fail_at("pool dimensions must be positive");
        pool = bmf::FactorPool(m, n);
        have_header = true;
        continue;
      }
      std::string wbits, hbits, extra;
      if (!(ls >> wbits >> hbits) || (ls >> extra))
        throw fail_at("expected '<w-bits> <h-bits>'");
      if (wbits.size() != m || hbits.size() != n)
        throw fail_at("bitstring lengths do not match the header");
      pool.add(bmf::BitVec::parse(wbits), bmf::BitVec::parse(hbits), 0);
    }
    if (!have_header) throw std::runtime_error(std::string(path) + ": missing 'rows cols' header");
    *out = new bmf_pool{std::move(pool)};
    return BMF_OK;
  });
}

bmf_status bmf_pool_save(const bmf_pool* p, const char* path) {
  return guarded([&]() -> bmf_status {
    require(p && path, "arguments must not be NULL");
    std::ofstream outf(path);
    if (!outf) throw bmf::io_error(std::string(path) + ": cannot open for writing");
    outf << p->p.rows() << ' ' << p->p.cols() << '\n';
    for (std::size_t i = 0; i < p->p.size(); ++i) {
      const bmf::RankOneFactor& f = p->p.factor(i);
      outf << f.w.to_string() << ' ' << f.h.to_string() << '\n';
    }
    if (!outf) throw bmf::io_error(std::string(path) + ": write failed");
    return BMF_OK;
  });
}

bmf_status bmf_combine(const bmf_dataset* d, const bmf_pool* p, size_t rank, uint64_t seed,
                       int allow_exact, size_t heur_t_max, size_t heur_n_trials,
                       size_t exact_combine_limit, bmf_combine_result** out) {
  return guarded([&]() -> bmf_status {
    require(d && p && out, "arguments must not be NULL");
    require(rank >= 1, "rank must be at least 1");
    require(p->p.rows() == d->d.x.rows() && p->p.cols() == d->d.x.cols(),
            "pool shape does not match the dataset");
    bmf::HeurCombParams heur;
    if (heur_t_max) heur.t_max = heur_t_max;
    if (heur_n_trials) heur.n_trials = heur_n_trials;
    const std::size_t limit = exact_combine_limit ? exact_combine_limit
                                                  : bmf::kDefaultExactCombineLimit;
    bmf::CombineSelection sel;
    bool used_exact = false;
    if (allow_exact) {
      try {
        sel = bmf::combine_exact(d->d.x, d->d.mask, p->p, rank, limit);
        used_exact = true;
      } catch (const bmf::capability_error&) {
        used_exact = false;
      }
    }
    if (!used_exact) {
      bmf::Rng rng(seed);
      bmf::CombineSelection start =
          bmf::greedy_forward_selection(d->d.x, d->d.mask, p->p, rank);
      sel = bmf::combine_heuristic(d->d.x, d->d.mask, p->p, rank, std::move(start), rng, heur);
    }
    auto* r = new bmf_combine_result;
    r->indices = sel.indices;
    r->error = sel.error;
    r->used_exact = used_exact;
    r->rows = p->p.rows();
    r->cols = p->p.cols();
    for (std::size_t idx : sel.indices) r->factors.push_back(p->p.factor(idx));
    *out = r;
    return BMF_OK;
  });
}

void bmf_combine_result_destroy(bmf_combine_result* c) { delete c; }

size_t bmf_combine_result_count(const bmf_combine_result* c) { return c ? c->indices.size() : 0; }

size_t bmf_combine_result_index(const bmf_combine_result* c, size_t i) {
  if (!c || i >= c->indices.size()) return static_cast<size_t>(-1);
  return c->indices[i];
}

uint64_t bmf_combine_result_error(const bmf_combine_result* c) { return c ? c->error : 0; }
int bmf_combine_result_used_exact(const bmf_combine_result* c) {
  return c && c->used_exact ? 1 : 0;
}

bmf_status bmf_combine_result_factors(const bmf_combine_result* c, const bmf_dataset* d,
                                      size_t rank, bmf_matrix** w, bmf_matrix** h) {
  return guarded([&]() -> bmf_status {
    require(c && d && w && h, "arguments must not be NULL");
    require(rank >= c->factors.size(), "rank smaller than the selection");
    require(c->rows == d->d.x.rows() && c->cols == d->d.x.cols(),
            "selection does not match the dataset");
    bmf::BoolMatrix wm(c->rows, rank), hm(rank, c->cols);
    for (std::size_t t = 0; t < c->factors.size(); ++t) {
      c->factors[t].w.for_each_set([&](std::size_t i) { wm.set(i, t); });
      hm.set_row(t, c->factors[t].h);
    }
    *w = new bmf_matrix{std::move(wm)};
    *h = new bmf_matrix{std::move(hm)};
    return BMF_OK;
  });
}

/* ---- reference table and reports ---- */

bmf_status bmf_reference_load(const char* path, bmf_reference** out) {
  return guarded([&]() -> bmf_status {
    require(path && out, "arguments must not be NULL");
    *out = new bmf_reference{bmf::ReferenceTable::load_file(path)};
    return BMF_OK;
  });
}

void bmf_reference_destroy(bmf_reference* t) { delete t; }

int bmf_reference_lookup(const bmf_reference* t, const char* dataset, size_t rank,
                         uint64_t* out) {
  if (!t || !dataset || !out) return 0;
  const auto v = t->t.best(dataset, rank);
  if (!v) return 0;
  *out = *v;
  return 1;
}

bmf_status bmf_report_create(bmf_report** out) {
  return guarded([&]() -> bmf_status {
    require(out != nullptr, "out must not be NULL");
    *out = new bmf_report;
    return BMF_OK;
  });
}

void bmf_report_destroy(bmf_report* r) { delete r; }

bmf_status bmf_report_add(bmf_report* r, const char* dataset, const char* method, size_t rank,
                          uint64_t seed, double time_s, uint64_t error, int has_diff,
                          int64_t diff_vs_reference, double relative_error_pct) {
  return guarded([&]() -> bmf_status {
    require(r && dataset && method, "arguments must not be NULL");
    bmf::ReportRow row;
    row.dataset = dataset;
    row.method = method;
    row.rank = rank;
    row.seed = seed;
    row.time_s = time_s;
    row.error = error;
    if (has_diff) row.diff_vs_reference = diff_vs_reference;
    row.relative_error_pct = relative_error_pct;
    r->rows.push_back(std::move(row));
    return BMF_OK;
  });
}

bmf_status bmf_report_to_string(const bmf_report* r, char** out) {
  return guarded([&]() -> bmf_status {
    require(r && out, "arguments must not be NULL");
    std::ostringstream os;
    bmf::write_report_csv(os, r->rows);
    *out = dup_string(os.str());
    require(*out != nullptr, "out of memory");
    return BMF_OK;
  });
}

bmf_status bmf_report_write(const bmf_report* r, const char* path) {
  return guarded([&]() -> bmf_status {
    require(r && path, "arguments must not be NULL");
    std::ofstream outf(path);
    if (!outf) throw bmf::io_error(std::string(path) + ": cannot open for writing");
    bmf::write_report_csv(outf, r->rows);
    if (!outf) throw bmf::io_error(std::string(path) + ": write failed");
    return BMF_OK;
  });
}

void bmf_string_free(char* s) { std::free(s); }

/* ---- benchmark ---- */

bmf_status bmf_bench_kernel(size_t n, size_t trials, uint64_t seed, bmf_bench_result* out) {
  return guarded([&]() -> bmf_status {
    require(out != nullptr, "out must not be NULL");
    bmf::Rng rng(seed);
    const bmf::BenchResult b = bmf::bench_bool_product(n, trials, rng);
    out->n = b.n;
    out->trials = b.trials;
    out->packed_seconds = b.packed_seconds;
    out->naive_seconds = b.naive_seconds;
    out->speedup = b.speedup;
    out->outputs_match = b.outputs_match ? 1 : 0;
    return BMF_OK;
  });
}

} /* extern "C" */
