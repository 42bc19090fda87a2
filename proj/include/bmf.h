/* Public C interface of the Boolean matrix factorization toolkit.
 *
 * All functions that can fail return a bmf_status; on failure,
 * bmf_last_error() describes the problem for the calling thread. Objects
 * returned through ** out-parameters are owned by the caller and released
 * with the matching _destroy function. Passing NULL where an object is
 * required yields BMF_ERR_INVALID_ARGUMENT.
 */
#ifndef BMF_H
#define BMF_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bmf_status {
  BMF_OK = 0,
  BMF_ERR_INVALID_ARGUMENT = 1, /* bad parameter or dimension mismatch */
  BMF_ERR_CAPABILITY = 2,       /* request exceeds a configured exact-solver limit */
  BMF_ERR_IO = 3,               /* file cannot be opened or written */
  BMF_ERR_PARSE = 4,            /* file contents are malformed */
  BMF_ERR_INTERNAL = 5
} bmf_status;

/* Message describing this thread's most recent failure; never NULL. */
const char* bmf_last_error(void);

const char* bmf_version(void);

/* Deterministic per-worker seed derivation. */
uint64_t bmf_child_seed(uint64_t base, uint64_t index);

/* ------------------------------------------------------------------ */
/* 0/1 matrices                                                        */

typedef struct bmf_matrix bmf_matrix;

bmf_status bmf_matrix_create(size_t rows, size_t cols, bmf_matrix** out);
/* row_major holds rows*cols bytes; any nonzero byte becomes a 1. */
bmf_status bmf_matrix_from_bits(size_t rows, size_t cols, const uint8_t* row_major,
                                bmf_matrix** out);
void bmf_matrix_destroy(bmf_matrix* m);

size_t bmf_matrix_rows(const bmf_matrix* m);
size_t bmf_matrix_cols(const bmf_matrix* m);
/* Returns 0 or 1; -1 on NULL matrix or out-of-range indices. */
int bmf_matrix_get(const bmf_matrix* m, size_t i, size_t j);
bmf_status bmf_matrix_set(bmf_matrix* m, size_t i, size_t j, int value);
uint64_t bmf_matrix_ones(const bmf_matrix* m);

/* Boolean product: out(i,j) = OR_k (w(i,k) AND h(k,j)). */
bmf_status bmf_bool_product(const bmf_matrix* w, const bmf_matrix* h, bmf_matrix** out);
/* Number of observed positions (mask = 1) where x and a disagree. */
bmf_status bmf_masked_sq_error(const bmf_matrix* x, const bmf_matrix* mask, const bmf_matrix* a,
                               uint64_t* out);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */

typedef struct bmf_dataset bmf_dataset;

/* Dense "0 1 ?" text or sparse triplets, selected by file extension
 * (.tri/.triplets = triplets). */
bmf_status bmf_dataset_load(const char* path, bmf_dataset** out);
bmf_status bmf_dataset_save(const bmf_dataset* d, const char* path);

typedef enum bmf_binarize_policy {
  BMF_BINARIZE_ROUND = 0,
  BMF_BINARIZE_NONZERO = 1,
  BMF_BINARIZE_MEAN = 2,   /* per-column mean of the observed entries */
  BMF_BINARIZE_MEDIAN = 3, /* per-column median of the observed entries */
  BMF_BINARIZE_FIXED = 4   /* value >= threshold */
} bmf_binarize_policy;

/* Loads a real-valued dense matrix and thresholds it to 0/1. */
bmf_status bmf_dataset_load_real(const char* path, bmf_binarize_policy policy, double threshold,
                                 bmf_dataset** out);

/* mask may be NULL for complete data. The matrices are copied. */
bmf_status bmf_dataset_from_matrix(const bmf_matrix* x, const bmf_matrix* mask,
                                   bmf_dataset** out);
void bmf_dataset_destroy(bmf_dataset* d);

size_t bmf_dataset_rows(const bmf_dataset* d);
size_t bmf_dataset_cols(const bmf_dataset* d);
int bmf_dataset_complete(const bmf_dataset* d); /* 1 if no entry is missing */
uint64_t bmf_dataset_ones(const bmf_dataset* d); /* observed ones (mask = 1) */
const char* bmf_dataset_name(const bmf_dataset* d);
bmf_status bmf_dataset_set_name(bmf_dataset* d, const char* name);
/* Label of row i, or "" when the dataset carries no row labels. */
const char* bmf_dataset_row_label(const bmf_dataset* d, size_t i);

/* ------------------------------------------------------------------ */
/* Factorization                                                       */

typedef enum bmf_method {
  BMF_METHOD_MS_AO = 0,
  BMF_METHOD_MS_COMB_AO = 1,
  BMF_METHOD_TREE = 2,
  BMF_METHOD_GREEDY_COMB = 3,
  BMF_METHOD_GREEDY_TREE = 4
} bmf_method;

typedef enum bmf_backend {
  BMF_BACKEND_EXACT = 0, /* per-column subproblems solved to optimality */
  BMF_BACKEND_GREEDY = 1 /* greedy plus randomized local search */
} bmf_backend;

typedef enum bmf_init_strategy {
  BMF_INIT_ALTERNATE = 0, /* cycle random selections and NMF starts */
  BMF_INIT_RANDOM_COLUMNS = 1,
  BMF_INIT_RANDOM_ROWS = 2,
  BMF_INIT_NMF = 3
} bmf_init_strategy;

typedef struct bmf_params {
  size_t rank;
  uint64_t seed;
  bmf_method method;
  bmf_backend backend;
  bmf_init_strategy init;

  /* Multi-start control: budget_seconds is a soft wall-clock budget (a
   * started run finishes); max_runs > 0 switches to a fixed, fully
   * deterministic run count instead. Both zero means one run. */
  double budget_seconds;
  size_t max_runs;

  size_t maxiter;          /* alternating sweeps per run */
  size_t exact_rank_limit; /* exact backend refuses larger ranks */
  size_t ls_t;             /* local-search budget; 0 = rank */
  size_t ls_q_max;         /* local-search radius; 0 = max(2, ceil(log2 rank)) */
  size_t nmf_iters;

  size_t heur_t_max;    /* swap-search accepted-move cap */
  size_t heur_n_trials; /* swap-search consecutive-failure cap */
  size_t exact_combine_limit;

  size_t tree_depth; /* tree method */
  size_t tree_children;
  size_t leaf_solutions;

  size_t calls; /* greedy-tree method */
  double per_call_budget;
  size_t per_call_runs;
} bmf_params;

/* Fills every field with its default value. */
void bmf_params_init(bmf_params* p);

typedef struct bmf_result bmf_result;

bmf_status bmf_run(const bmf_dataset* d, const bmf_params* p, bmf_result** out);

void bmf_result_destroy(bmf_result* r);
uint64_t bmf_result_error(const bmf_result* r);
double bmf_result_relative_error(const bmf_result* r);
size_t bmf_result_rank(const bmf_result* r);
double bmf_result_time_seconds(const bmf_result* r);
const char* bmf_result_method(const bmf_result* r);
/* Copies of the factors; w is rows x rank, h is rank x cols. */
bmf_status bmf_result_factors(const bmf_result* r, bmf_matrix** w, bmf_matrix** h);
/* Error trajectory: two bootstrap entries, then one entry per accepted
 * sweep (methods that combine several runs report the winning run's trace
 * or the final error only). */
size_t bmf_result_trace_len(const bmf_result* r);
int64_t bmf_result_trace_get(const bmf_result* r, size_t i);

/* ------------------------------------------------------------------ */
/* Topics                                                              */

typedef struct bmf_topics bmf_topics;

/* Factorizes the dataset with `p`, optionally diversifies the topics
 * (dropping ones backed by fewer than w_min documents or dominated by
 * overlap more than 1/ratio of their size), and lists each topic's top_k
 * most important words. Requires row labels when the dataset has them;
 * falls back to row indices otherwise. */
bmf_status bmf_topics_run(const bmf_dataset* d, const bmf_params* p, size_t top_k,
                          int diversify, uint64_t w_min, uint64_t ratio, bmf_topics** out);

void bmf_topics_destroy(bmf_topics* t);
size_t bmf_topics_count(const bmf_topics* t);
uint64_t bmf_topics_error(const bmf_topics* t);
/* Documents assigned to the topic. */
uint64_t bmf_topics_size(const bmf_topics* t, size_t topic);
size_t bmf_topics_word_count(const bmf_topics* t, size_t topic);
const char* bmf_topics_word(const bmf_topics* t, size_t topic, size_t i);
uint32_t bmf_topics_word_weight(const bmf_topics* t, size_t topic, size_t i);

/* ------------------------------------------------------------------ */
/* Factor pools and combining                                          */

typedef struct bmf_pool bmf_pool;

bmf_status bmf_pool_create(size_t rows, size_t cols, bmf_pool** out);
void bmf_pool_destroy(bmf_pool* p);
size_t bmf_pool_size(const bmf_pool* p);
size_t bmf_pool_rows(const bmf_pool* p);
size_t bmf_pool_cols(const bmf_pool* p);
/* Adds every column of w paired with the matching row of h; duplicates
 * collapse onto the existing pool entry. */
bmf_status bmf_pool_add_factors(bmf_pool* p, const bmf_matrix* w, const bmf_matrix* h);

/* Pool file: comments ('#'), an "m n" header line, then one factor per line
 * as two bitstrings "<w-bits> <h-bits>" of lengths m and n. */
bmf_status bmf_pool_load(const char* path, bmf_pool** out);
bmf_status bmf_pool_save(const bmf_pool* p, const char* path);

typedef struct bmf_combine_result bmf_combine_result;

/* Picks the best min(rank, pool size) factors for the dataset: exactly when
 * the pool is small enough and allow_exact is set, by seeded swap search
 * otherwise. heur_t_max/heur_n_trials of 0 use the defaults. */
bmf_status bmf_combine(const bmf_dataset* d, const bmf_pool* p, size_t rank, uint64_t seed,
                       int allow_exact, size_t heur_t_max, size_t heur_n_trials,
                       size_t exact_combine_limit, bmf_combine_result** out);

void bmf_combine_result_destroy(bmf_combine_result* c);
size_t bmf_combine_result_count(const bmf_combine_result* c);
/* Pool index of the i-th selected factor. */
size_t bmf_combine_result_index(const bmf_combine_result* c, size_t i);
uint64_t bmf_combine_result_error(const bmf_combine_result* c);
int bmf_combine_result_used_exact(const bmf_combine_result* c);
/* Rebuilds rank-wide factors from the selection (zero-padded if shorter). */
bmf_status bmf_combine_result_factors(const bmf_combine_result* c, const bmf_dataset* d,
                                      size_t rank, bmf_matrix** w, bmf_matrix** h);

/* ------------------------------------------------------------------ */
/* Reports                                                             */

typedef struct bmf_reference bmf_reference;

/* CSV with columns dataset,rank,best_error. */
bmf_status bmf_reference_load(const char* path, bmf_reference** out);
void bmf_reference_destroy(bmf_reference* t);
/* Returns 1 and fills *out when a value exists, 0 otherwise. */
int bmf_reference_lookup(const bmf_reference* t, const char* dataset, size_t rank,
                         uint64_t* out);

typedef struct bmf_report bmf_report;

bmf_status bmf_report_create(bmf_report** out);
void bmf_report_destroy(bmf_report* r);
/* has_diff = 0 leaves the error_diff_vs_reference column empty. */
bmf_status bmf_report_add(bmf_report* r, const char* dataset, const char* method, size_t rank,
                          uint64_t seed, double time_s, uint64_t error, int has_diff,
                          int64_t diff_vs_reference, double relative_error_pct);
/* CSV including the header line; free with bmf_string_free. */
bmf_status bmf_report_to_string(const bmf_report* r, char** out);
bmf_status bmf_report_write(const bmf_report* r, const char* path);
void bmf_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Kernel benchmark                                                    */

typedef struct bmf_bench_result {
  size_t n;
  size_t trials;
  double packed_seconds; /* mean per trial */
  double naive_seconds;  /* mean per trial, one byte per entry, triple loop */
  double speedup;
  int outputs_match; /* packed result bit-identical to the reference */
} bmf_bench_result;

bmf_status bmf_bench_kernel(size_t n, size_t trials, uint64_t seed, bmf_bench_result* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BMF_H */
