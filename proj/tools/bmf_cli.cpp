// Command-line front end for the Boolean matrix factorization library.
// Talks to the library exclusively through the public C interface.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bmf.h"

namespace {

[[noreturn]] void die(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  std::exit(1);
}

void check(bmf_status s) {
  if (s != BMF_OK) die(bmf_last_error());
}

// Replaces every "--preset FILE" (or --preset=FILE) argument by the
// whitespace-separated tokens of FILE; '#' starts a comment until the end of
// the line. Presets may not pull in further presets.
std::vector<std::string> expand_presets(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--preset") {
      if (i + 1 >= args.size()) die("--preset needs a file argument");
      path = args[++i];
    } else if (args[i].rfind("--preset=", 0) == 0) {
      path = args[i].substr(std::string("--preset=").size());
    } else {
      out.push_back(args[i]);
      continue;
    }
    std::ifstream in(path);
    if (!in) die(path + ": cannot open preset file");
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) {
        if (tok == "--preset" || tok.rfind("--preset=", 0) == 0)
          die(path + ": presets may not include other presets");
        out.push_back(tok);
      }
    }
  }
  return out;
}

struct Shared {
  std::string input;
  std::string name_override;
  std::string binarize;  // empty = already 0/1
  double threshold = 0.5;

  std::size_t rank = 0;
  std::string method = "ms-ao";
  std::string backend = "exact";
  std::string init = "alternate";
  std::uint64_t seed = 0;
  double budget = 0.0;
  std::size_t runs = 0;
  std::size_t trials = 1;
  std::size_t workers = 0;

  std::size_t maxiter = 100;
  std::size_t exact_rank_limit = 20;
  std::size_t ls_t = 0;
  std::size_t ls_q_max = 0;
  std::size_t nmf_iters = 200;
  std::size_t heur_t_max = 100;
  std::size_t heur_n_trials = 1000;
  std::size_t exact_combine_limit = 25;
  std::size_t depth = 1;
  std::size_t children = 2;
  std::size_t leaf_solutions = 5;
  std::size_t calls = 3;
  double per_call_budget = 10.0;
  std::size_t per_call_runs = 0;
};

void add_run_flags(CLI::App* cmd, Shared& o, bool need_rank = true) {
  cmd->add_option("-i,--input", o.input, "dataset file (dense 0/1/? or .tri triplets)")
      ->required();
  cmd->add_option("--name", o.name_override, "override the dataset name in reports");
  cmd->add_option("--binarize", o.binarize,
                  "treat the input as real-valued and threshold it: round, nonzero, mean, "
                  "median, fixed")
      ->check(CLI::IsMember({"round", "nonzero", "mean", "median", "fixed"}));
  cmd->add_option("--threshold", o.threshold, "threshold for --binarize fixed");
  auto* r = cmd->add_option("-r,--rank", o.rank, "factorization rank");
  if (need_rank) r->required();
  cmd->add_option("-m,--method", o.method, "ms-ao, ms-comb-ao, tree-bmf, greedy-comb, greedy-tree")
      ->check(CLI::IsMember({"ms-ao", "ms-comb-ao", "tree-bmf", "greedy-comb", "greedy-tree"}));
  cmd->add_option("--backend", o.backend, "per-column solver: exact or greedy")
      ->check(CLI::IsMember({"exact", "greedy"}));
  cmd->add_option("--init", o.init, "alternate, random-columns, random-rows, nmf")
      ->check(CLI::IsMember({"alternate", "random-columns", "random-rows", "nmf"}));
  cmd->add_option("-s,--seed", o.seed, "base seed; trial t uses a derived child seed");
  cmd->add_option("-b,--budget", o.budget, "wall-clock budget per trial in seconds (soft)");
  cmd->add_option("--runs", o.runs, "fixed multi-start run count per trial (deterministic mode)");
  cmd->add_option("-t,--trials", o.trials, "independent seeded trials; the best one is reported");
  cmd->add_option("--workers", o.workers,
                  "parallel trial workers (default: BMF_WORKERS or the hardware count)");
  cmd->add_option("--maxiter", o.maxiter, "alternating sweeps per run");
  cmd->add_option("--exact-rank-limit", o.exact_rank_limit, "exact backend rank cap");
  cmd->add_option("--ls-t", o.ls_t, "local-search budget (0 = rank)");
  cmd->add_option("--ls-q-max", o.ls_q_max, "local-search radius (0 = auto)");
  cmd->add_option("--nmf-iters", o.nmf_iters, "NMF iterations for the nmf initializer");
  cmd->add_option("--heur-t-max", o.heur_t_max, "swap-search accepted-move cap");
  cmd->add_option("--heur-n-trials", o.heur_n_trials, "swap-search failure cap");
  cmd->add_option("--exact-combine-limit", o.exact_combine_limit,
                  "largest pool combined exactly");
  cmd->add_option("--depth", o.depth, "tree-bmf depth");
  cmd->add_option("--children", o.children, "tree-bmf children per node");
  cmd->add_option("--leaf-solutions", o.leaf_solutions, "tree-bmf runs per leaf");
  cmd->add_option("--calls", o.calls, "greedy-tree calls");
  cmd->add_option("--per-call-budget", o.per_call_budget, "greedy-tree seconds per call");
  cmd->add_option("--per-call-runs", o.per_call_runs, "greedy-tree fixed runs per call");
}

bmf_method parse_method(const std::string& m) {
  if (m == "ms-ao") return BMF_METHOD_MS_AO;
  if (m == "ms-comb-ao") return BMF_METHOD_MS_COMB_AO;
  if (m == "tree-bmf") return BMF_METHOD_TREE;
  if (m == "greedy-comb") return BMF_METHOD_GREEDY_COMB;
  return BMF_METHOD_GREEDY_TREE;
}

bmf_params make_params(const Shared& o) {
  bmf_params p;
  bmf_params_init(&p);
  p.rank = o.rank;
  p.seed = o.seed;
  p.method = parse_method(o.method);
  p.backend = o.backend == "exact" ? BMF_BACKEND_EXACT : BMF_BACKEND_GREEDY;
  p.init = o.init == "random-columns" ? BMF_INIT_RANDOM_COLUMNS
           : o.init == "random-rows"  ? BMF_INIT_RANDOM_ROWS
           : o.init == "nmf"          ? BMF_INIT_NMF
                                      : BMF_INIT_ALTERNATE;
  p.budget_seconds = o.budget;
  p.max_runs = o.runs;
  p.maxiter = o.maxiter;
  p.exact_rank_limit = o.exact_rank_limit;
  p.ls_t = o.ls_t;
  p.ls_q_max = o.ls_q_max;
  p.nmf_iters = o.nmf_iters;
  p.heur_t_max = o.heur_t_max;
  p.heur_n_trials = o.heur_n_trials;
  p.exact_combine_limit = o.exact_combine_limit;
  p.tree_depth = o.depth;
  p.tree_children = o.children;
  p.leaf_solutions = o.leaf_solutions;
  p.calls = o.calls;
  p.per_call_budget = o.per_call_budget;
  p.per_call_runs = o.per_call_runs;
  return p;
}

bmf_binarize_policy parse_binarize(const std::string& b) {
  if (b == "round") return BMF_BINARIZE_ROUND;
  if (b == "nonzero") return BMF_BINARIZE_NONZERO;
  if (b == "mean") return BMF_BINARIZE_MEAN;
  if (b == "median") return BMF_BINARIZE_MEDIAN;
  return BMF_BINARIZE_FIXED;
}

bmf_dataset* load_input(const Shared& o) {
  bmf_dataset* d = nullptr;
  if (o.binarize.empty())
    check(bmf_dataset_load(o.input.c_str(), &d));
  else
    check(bmf_dataset_load_real(o.input.c_str(), parse_binarize(o.binarize), o.threshold, &d));
  if (!o.name_override.empty()) check(bmf_dataset_set_name(d, o.name_override.c_str()));
  return d;
}

std::size_t worker_count(const Shared& o) {
  if (o.workers > 0) return o.workers;
  if (const char* env = std::getenv("BMF_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

struct TrialOutcome {
  std::uint64_t seed = 0;
  std::uint64_t error = 0;
  double rel_err = 0.0;
  double time_s = 0.0;
  std::string method;
  bmf_result* result = nullptr;
};

// Runs `trials` independent factorizations with derived seeds, in parallel
// across the workers. Results are deterministic in everything but the
// wall-clock fields.
std::vector<TrialOutcome> run_trials(const bmf_dataset* d, const Shared& o) {
  const bmf_params base = make_params(o);
  std::vector<TrialOutcome> outcomes(o.trials);
  std::vector<std::string> errors(o.trials);
  const std::size_t workers = std::min<std::size_t>(worker_count(o), o.trials);

  std::size_t next = 0;
  std::mutex mu;
  auto work = [&]() {
    for (;;) {
      std::size_t t;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= o.trials) return;
        t = next++;
      }
      bmf_params p = base;
      p.seed = o.trials == 1 ? o.seed : bmf_child_seed(o.seed, t);
      bmf_result* r = nullptr;
      const bmf_status s = bmf_run(d, &p, &r);
      if (s != BMF_OK) {
        errors[t] = bmf_last_error();
        continue;
      }
      outcomes[t] = {p.seed,
                     bmf_result_error(r),
                     bmf_result_relative_error(r),
                     bmf_result_time_seconds(r),
                     bmf_result_method(r),
                     r};
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const std::string& e : errors)
    if (!e.empty()) die(e);
  return outcomes;
}

std::size_t best_trial(const std::vector<TrialOutcome>& v) {
  std::size_t best = 0;
  for (std::size_t t = 1; t < v.size(); ++t)
    if (v[t].error < v[best].error) best = t;
  return best;
}

void save_factors(const bmf_dataset* d, bmf_result* r, const std::string& dir,
                  const std::string& stem) {
  std::filesystem::create_directories(dir);
  bmf_matrix *w = nullptr, *h = nullptr;
  check(bmf_result_factors(r, &w, &h));
  auto write_matrix = [&](bmf_matrix* m, const std::string& path) {
    std::ofstream out(path);
    if (!out) die(path + ": cannot open for writing");
    for (std::size_t i = 0; i < bmf_matrix_rows(m); ++i) {
      for (std::size_t j = 0; j < bmf_matrix_cols(m); ++j) {
        if (j) out << ' ';
        out << bmf_matrix_get(m, i, j);
      }
      out << '\n';
    }
  };
  write_matrix(w, dir + "/" + stem + "_w.txt");
  write_matrix(h, dir + "/" + stem + "_h.txt");
  bmf_matrix_destroy(w);
  bmf_matrix_destroy(h);
  (void)d;
}

void write_csv(const std::string& path, const bmf_dataset* d, const Shared& o,
               const std::vector<TrialOutcome>& outcomes, const std::string& reference) {
  bmf_reference* ref = nullptr;
  if (!reference.empty()) check(bmf_reference_load(reference.c_str(), &ref));
  bmf_report* rep = nullptr;
  check(bmf_report_create(&rep));
  for (const TrialOutcome& t : outcomes) {
    uint64_t best = 0;
    const int has =
        ref ? bmf_reference_lookup(ref, bmf_dataset_name(d), o.rank, &best) : 0;
    const int64_t diff =
        has ? static_cast<int64_t>(t.error) - static_cast<int64_t>(best) : 0;
    check(bmf_report_add(rep, bmf_dataset_name(d), t.method.c_str(), o.rank, t.seed, t.time_s,
                         t.error, has, diff, t.rel_err * 100.0));
  }
  check(bmf_report_write(rep, path.c_str()));
  bmf_report_destroy(rep);
  if (ref) bmf_reference_destroy(ref);
}

int cmd_factorize(const Shared& o, const std::string& csv, const std::string& save_dir,
                  const std::string& reference, bool show_trace) {
  bmf_dataset* d = load_input(o);
  std::vector<TrialOutcome> outcomes = run_trials(d, o);
  const std::size_t best = best_trial(outcomes);

  std::cout << "dataset=" << bmf_dataset_name(d) << " (" << bmf_dataset_rows(d) << "x"
            << bmf_dataset_cols(d) << (bmf_dataset_complete(d) ? "" : ", masked")
            << ") method=" << o.method << " r=" << o.rank << " trials=" << o.trials << "\n";
  std::printf("%-6s %-20s %12s %10s %10s\n", "trial", "seed", "error", "rel_err%", "time_s");
  for (std::size_t t = 0; t < outcomes.size(); ++t)
    std::printf("%-6zu %-20llu %12llu %10.2f %10.3f\n", t,
                static_cast<unsigned long long>(outcomes[t].seed),
                static_cast<unsigned long long>(outcomes[t].error),
                outcomes[t].rel_err * 100.0, outcomes[t].time_s);
  std::cout << "best: trial " << best << " error " << outcomes[best].error << "\n";

  if (!reference.empty()) {
    bmf_reference* ref = nullptr;
    check(bmf_reference_load(reference.c_str(), &ref));
    uint64_t known = 0;
    if (bmf_reference_lookup(ref, bmf_dataset_name(d), o.rank, &known))
      std::cout << "reference best " << known << ", diff "
                << static_cast<long long>(outcomes[best].error) -
                       static_cast<long long>(known)
                << "\n";
    bmf_reference_destroy(ref);
  }

  if (show_trace) {
    std::cout << "trace (best trial):";
    bmf_result* r = outcomes[best].result;
    for (std::size_t i = 0; i < bmf_result_trace_len(r); ++i)
      std::cout << ' ' << bmf_result_trace_get(r, i);
    std::cout << "\n";
  }

  if (!csv.empty()) write_csv(csv, d, o, outcomes, reference);
  if (!save_dir.empty()) {
    std::ostringstream stem;
    stem << bmf_dataset_name(d) << "_" << o.method << "_r" << o.rank;
    save_factors(d, outcomes[best].result, save_dir, stem.str());
  }

  for (TrialOutcome& t : outcomes) bmf_result_destroy(t.result);
  bmf_dataset_destroy(d);
  return 0;
}

int cmd_bench(const std::vector<std::size_t>& sizes, std::size_t trials, std::uint64_t seed,
              const std::string& csv) {
  std::printf("%-8s %-8s %14s %14s %10s %7s\n", "n", "trials", "packed_s", "naive_s", "speedup",
              "match");
  std::ostringstream rows;
  rows << "n,trials,packed_s,naive_s,speedup,match\n";
  for (std::size_t n : sizes) {
    bmf_bench_result b;
    check(bmf_bench_kernel(n, trials, seed, &b));
    std::printf("%-8zu %-8zu %14.6f %14.6f %10.2f %7s\n", b.n, b.trials, b.packed_seconds,
                b.naive_seconds, b.speedup, b.outputs_match ? "yes" : "NO");
    rows << b.n << ',' << b.trials << ',' << b.packed_seconds << ',' << b.naive_seconds << ','
         << b.speedup << ',' << (b.outputs_match ? 1 : 0) << '\n';
    if (!b.outputs_match) die("packed and naive products disagree");
  }
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) die(csv + ": cannot open for writing");
    out << rows.str();
  }
  return 0;
}

int cmd_topics(const Shared& o, std::size_t top_k, bool diversify, std::uint64_t w_min,
               std::uint64_t ratio, const std::string& csv, const std::string& reference) {
  bmf_dataset* d = load_input(o);
  const bmf_params p = make_params(o);
  bmf_topics* t = nullptr;
  const auto t0 = std::chrono::steady_clock::now();
  check(bmf_topics_run(d, &p, top_k, diversify ? 1 : 0, w_min, ratio, &t));
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::size_t k = bmf_topics_count(t);
  std::cout << "dataset=" << bmf_dataset_name(d) << " topics=" << k
            << " error=" << bmf_topics_error(t) << "\n";
  for (std::size_t i = 0; i < k; ++i) {
    std::cout << "topic " << i << " (" << bmf_topics_size(t, i) << " docs):";
    for (std::size_t wi = 0; wi < bmf_topics_word_count(t, i); ++wi)
      std::cout << ' ' << bmf_topics_word(t, i, wi) << '(' << bmf_topics_word_weight(t, i, wi)
                << ')';
    std::cout << "\n";
  }

  if (!csv.empty()) {
    std::vector<TrialOutcome> one(1);
    one[0].seed = o.seed;
    one[0].error = bmf_topics_error(t);
    one[0].method = o.method;
    one[0].time_s = elapsed;
    const std::uint64_t ones = bmf_dataset_ones(d);
    one[0].rel_err =
        ones ? std::sqrt(static_cast<double>(one[0].error)) / std::sqrt(static_cast<double>(ones))
             : 0.0;
    write_csv(csv, d, o, one, reference);
  }
  bmf_topics_destroy(t);
  bmf_dataset_destroy(d);
  return 0;
}

int cmd_combine(const Shared& o, const std::string& pool_path, bool heuristic_only,
                const std::string& selection_out, const std::string& save_dir) {
  bmf_dataset* d = load_input(o);
  bmf_pool* pool = nullptr;
  check(bmf_pool_load(pool_path.c_str(), &pool));
  bmf_combine_result* c = nullptr;
  check(bmf_combine(d, pool, o.rank, o.seed, heuristic_only ? 0 : 1, o.heur_t_max,
                    o.heur_n_trials, o.exact_combine_limit, &c));

  std::cout << "pool=" << bmf_pool_size(pool) << " rank=" << o.rank
            << " mode=" << (bmf_combine_result_used_exact(c) ? "exact" : "heuristic")
            << " error=" << bmf_combine_result_error(c) << "\nselection:";
  for (std::size_t i = 0; i < bmf_combine_result_count(c); ++i)
    std::cout << ' ' << bmf_combine_result_index(c, i);
  std::cout << "\n";

  if (!selection_out.empty()) {
    std::ofstream out(selection_out);
    if (!out) die(selection_out + ": cannot open for writing");
    out << "index\n";
    for (std::size_t i = 0; i < bmf_combine_result_count(c); ++i)
      out << bmf_combine_result_index(c, i) << "\n";
  }
  if (!save_dir.empty()) {
    std::filesystem::create_directories(save_dir);
    bmf_matrix *w = nullptr, *h = nullptr;
    check(bmf_combine_result_factors(c, d, o.rank, &w, &h));
    auto write_matrix = [&](bmf_matrix* m, const std::string& path) {
      std::ofstream out(path);
      if (!out) die(path + ": cannot open for writing");
      for (std::size_t i = 0; i < bmf_matrix_rows(m); ++i) {
        for (std::size_t j = 0; j < bmf_matrix_cols(m); ++j) {
          if (j) out << ' ';
          out << bmf_matrix_get(m, i, j);
        }
        out << '\n';
      }
    };
    write_matrix(w, save_dir + "/combined_w.txt");
    write_matrix(h, save_dir + "/combined_h.txt");
    bmf_matrix_destroy(w);
    bmf_matrix_destroy(h);
  }
  bmf_combine_result_destroy(c);
  bmf_pool_destroy(pool);
  bmf_dataset_destroy(d);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boolean matrix factorization toolkit"};
  app.require_subcommand(1);

  Shared o;
  std::string csv, save_dir, reference, pool_path, selection_out;
  bool show_trace = false, diversify = false, heuristic_only = false;
  std::size_t top_k = 5;
  std::uint64_t w_min = 10, ratio = 8;
  std::vector<std::size_t> bench_sizes{2000};
  std::size_t bench_trials = 10;
  std::uint64_t bench_seed = 0;

  auto* fac = app.add_subcommand("factorize", "factorize a dataset and report errors");
  add_run_flags(fac, o);
  fac->add_option("--csv", csv, "write per-trial rows as CSV");
  fac->add_option("--save-factors", save_dir, "write the best trial's W/H into this directory");
  fac->add_option("--reference", reference, "reference CSV (dataset,rank,best_error)");
  fac->add_flag("--trace", show_trace, "print the best trial's error trajectory");

  auto* ben = app.add_subcommand("bench-kernel", "time the packed product against a byte-array reference");
  ben->add_option("-n,--n", bench_sizes, "matrix sizes to benchmark");
  ben->add_option("-t,--trials", bench_trials, "trials per size");
  ben->add_option("-s,--seed", bench_seed, "seed for the random matrices");
  ben->add_option("--csv", csv, "write the timing table as CSV");

  auto* top = app.add_subcommand("topics", "factorize and list each topic's top words");
  add_run_flags(top, o);
  top->add_option("-k,--top-k", top_k, "words listed per topic");
  top->add_flag("--diversify", diversify, "drop rare or overlap-dominated topics");
  top->add_option("--w-min", w_min, "minimum documents per kept topic");
  top->add_option("--ratio", ratio, "required dominance of topic size over overlap");
  top->add_option("--csv", csv, "write a summary row as CSV");
  top->add_option("--reference", reference, "reference CSV (dataset,rank,best_error)");

  auto* com = app.add_subcommand("combine", "select the best factors from a saved pool");
  add_run_flags(com, o);
  com->add_option("--pool", pool_path, "pool file (header 'm n', then '<w-bits> <h-bits>' lines)")
      ->required();
  com->add_flag("--heuristic", heuristic_only, "skip the exact combiner even for small pools");
  com->add_option("--selection-out", selection_out, "write the selected pool indices to a file");
  com->add_option("--save-factors", save_dir, "write the combined W/H into this directory");

  std::vector<std::string> args = expand_presets(argc, argv);
  std::vector<char*> argv2;
  static std::string prog = "bmf";
  argv2.push_back(prog.data());
  for (auto& a : args) argv2.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv2.size()), argv2.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (fac->parsed()) return cmd_factorize(o, csv, save_dir, reference, show_trace);
    if (ben->parsed()) return cmd_bench(bench_sizes, bench_trials, bench_seed, csv);
    if (top->parsed()) return cmd_topics(o, top_k, diversify, w_min, ratio, csv, reference);
    if (com->parsed()) return cmd_combine(o, pool_path, heuristic_only, selection_out, save_dir);
  } catch (const std::exception& e) {
    die(e.what());
  }
  return 0;
}
