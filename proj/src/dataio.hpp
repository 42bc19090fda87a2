#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bitmatrix.hpp"

namespace bmf {

// File-level failures (open/write); format problems use plain runtime_error
// so the two are distinguishable at the API boundary.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A 0/1 matrix with an observation mask (mask = 0 marks a missing entry) and
// optional row/column labels.
struct Dataset {
  std::string name;
  BoolMatrix x;
  BoolMatrix mask;
  std::vector<std::string> row_labels;  // empty, or one label per row
  std::vector<std::string> col_labels;  // empty, or one label per column

  bool complete() const { return is_all_ones(mask); }
};

enum class FileFormat { auto_detect, dense, triplets };

// Dense text format: one row per line of whitespace-separated 0/1/? tokens,
// '?' marking a missing entry. Lines starting with '#' are comments, except
// "# rowlabels:" / "# collabels:" which carry tab-separated labels and
// round-trip through save_dense.
Dataset load_dense(std::istream& in, const std::string& name = "");
void save_dense(const Dataset& d, std::ostream& out);

// Sparse triplet format: optional comments/labels, an "m n" header line, one
// "i j" line (1-based) per one-entry, then optionally a "# missing" line
// followed by "i j" lines for unobserved entries.
Dataset load_triplets(std::istream& in, const std::string& name = "");
void save_triplets(const Dataset& d, std::ostream& out);

// Extension .tri/.triplets selects the triplet format, anything else dense.
Dataset load_dataset(const std::string& path, FileFormat fmt = FileFormat::auto_detect);
void save_dataset(const Dataset& d, const std::string& path,
                  FileFormat fmt = FileFormat::auto_detect);

// Real-valued dense matrix (same layout as the dense format, arbitrary
// numeric tokens; '?' still marks missing entries) for binarization.
struct RealMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> values;  // row-major; missing entries hold 0
  BoolMatrix mask;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

RealMatrix load_dense_real(std::istream& in);
RealMatrix load_dense_real_file(const std::string& path);

enum class BinarizePolicy {
  round,              // value >= 0.5
  nonzero,            // value != 0 (term counts)
  mean_per_column,    // value >= mean of the column's observed entries
  median_per_column,  // value >= median of the column's observed entries
  fixed,              // value >= threshold
};

// Thresholds a real matrix to 0/1. Missing entries come out 0; columns with
// no observed entries come out all-zero under the per-column policies.
// Non-finite values are rejected.
BoolMatrix binarize(const RealMatrix& values, BinarizePolicy policy, double threshold = 0.5);

// Importance of word (row) i for topic k: the number of documents that
// contain the word and are assigned to the topic, or 0 where w(i,k) = 0.
struct TopicImportance {
  std::size_t rows = 0, topics = 0;
  std::vector<std::uint32_t> counts;  // row-major rows x topics

  std::uint32_t at(std::size_t i, std::size_t k) const { return counts[i * topics + k]; }
};

TopicImportance topic_importance(const BoolMatrix& x, const BoolMatrix& w, const BoolMatrix& h);

struct TopicWord {
  std::string label;
  std::uint32_t count = 0;
  std::size_t row = 0;
};

// The top_k most important words of each topic (count descending, original
// order on ties). Words with w(i,k) = 0 are never listed, so a topic's list
// may be shorter than top_k.
std::vector<std::vector<TopicWord>> top_words(const TopicImportance& imp, const BoolMatrix& w,
                                              std::size_t top_k,
                                              const std::vector<std::string>& labels);

// sqrt(masked error) / sqrt(number of observed ones of x); rejects data with
// no observed ones.
double relative_error(const BoolMatrix& x, const BoolMatrix& mask, const BoolMatrix& w,
                      const BoolMatrix& h);

struct ReportRow {
  std::string dataset;
  std::string method;
  std::size_t rank = 0;
  std::uint64_t seed = 0;
  double time_s = 0.0;
  std::uint64_t error = 0;
  std::optional<std::int64_t> diff_vs_reference;  // empty when no reference value exists
  double relative_error_pct = 0.0;
};

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

// Best known errors per (dataset, rank), loaded from a small CSV with
// columns dataset,rank,best_error.
class ReferenceTable {
 public:
  static ReferenceTable load(std::istream& in);
  static ReferenceTable load_file(const std::string& path);

  std::optional<std::uint64_t> best(const std::string& dataset, std::size_t rank) const;
  std::size_t size() const { return best_.size(); }

 private:
  std::map<std::pair<std::string, std::size_t>, std::uint64_t> best_;
};

}  // namespace bmf
