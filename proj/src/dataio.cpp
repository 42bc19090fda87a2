#include "dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace bmf {

namespace {

[[noreturn]] void parse_fail(const std::string& where, std::size_t line, const std::string& msg) {
  std::ostringstream os;
  os << (where.empty() ? "<stream>" : where) << ":" << line << ": " << msg;
  throw std::runtime_error(os.str());
}

std::vector<std::string> split_labels(const std::string& rest) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : rest) {
    if (c == '\t') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string rstrip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ' || s.back() == '\t'))
    s.pop_back();
  return s;
}

bool starts_with(const std::string& s, const std::string& p) {
  return s.size() >= p.size() && s.compare(0, p.size(), p) == 0;
}

constexpr const char* kRowLabelPrefix = "# rowlabels:";
constexpr const char* kColLabelPrefix = "# collabels:";

struct LabelSink {
  std::vector<std::string> rows, cols;
  // Returns true when the comment line carried labels.
  bool take(const std::string& line) {
    const auto tail = [&](const char* prefix) {
      std::string rest = line.substr(std::string(prefix).size());
      if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
      return rest;
    };
    if (starts_with(line, kRowLabelPrefix)) {
      rows = split_labels(tail(kRowLabelPrefix));
      return true;
    }
    if (starts_with(line, kColLabelPrefix)) {
      cols = split_labels(tail(kColLabelPrefix));
      return true;
    }
    return false;
  }
};

void check_labels(const Dataset& d, const std::string& name) {
  if (!d.row_labels.empty() && d.row_labels.size() != d.x.rows())
    throw std::runtime_error(name + ": row label count does not match the matrix");
  if (!d.col_labels.empty() && d.col_labels.size() != d.x.cols())
    throw std::runtime_error(name + ": column label count does not match the matrix");
}

void write_labels(const Dataset& d, std::ostream& out) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += '\t';
      s += v[i];
    }
    return s;
  };
  if (!d.row_labels.empty()) out << kRowLabelPrefix << " " << join(d.row_labels) << "\n";
  if (!d.col_labels.empty()) out << kColLabelPrefix << " " << join(d.col_labels) << "\n";
}

// Shared dense scanner for the 0/1 and real loaders.
template <class CellFn>
void scan_dense(std::istream& in, const std::string& name, LabelSink& labels,
                std::size_t& n_cols, std::size_t& n_rows, CellFn&& cell) {
  std::string line;
  std::size_t lineno = 0;
  n_cols = 0;
  n_rows = 0;
  bool have_cols = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = rstrip(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      labels.take(line);
      continue;
    }
    std::istringstream ls(line);
    std::string tok;
    std::size_t j = 0;
    while (ls >> tok) {
      cell(n_rows, j, tok, lineno);
      ++j;
    }
    if (!have_cols) {
      n_cols = j;
      have_cols = true;
    } else if (j != n_cols) {
      parse_fail(name, lineno, "expected " + std::to_string(n_cols) + " columns, found " +
                                    std::to_string(j));
    }
    ++n_rows;
  }
}

}  // namespace

Dataset load_dense(std::istream& in, const std::string& name) {
  struct Cell {
    std::size_t i, j;
    int v;  // 0, 1, or -1 for missing
  };
  std::vector<Cell> cells;
  LabelSink labels;
  std::size_t n_rows = 0, n_cols = 0;
  scan_dense(in, name, labels, n_cols, n_rows,
             [&](std::size_t i, std::size_t j, const std::string& tok, std::size_t lineno) {
               int v;
               if (tok == "0")
                 v = 0;
               else if (tok == "1")
                 v = 1;
               else if (tok == "?")
                 v = -1;
               else
                 parse_fail(name, lineno, "expected 0, 1 or ?, found '" + tok + "'");
               cells.push_back({i, j, v});
             });

  Dataset d;
  d.name = name;
  d.x = BoolMatrix(n_rows, n_cols);
  d.mask = BoolMatrix::ones(n_rows, n_cols);
  for (const Cell& c : cells) {
    if (c.v == 1)
      d.x.set(c.i, c.j);
    else if (c.v == -1)
      d.mask.set(c.i, c.j, false);
  }
  d.row_labels = std::move(labels.rows);
  d.col_labels = std::move(labels.cols);
  check_labels(d, name.empty() ? "<stream>" : name);
  return d;
}

void save_dense(const Dataset& d, std::ostream& out) {
  write_labels(d, out);
  for (std::size_t i = 0; i < d.x.rows(); ++i) {
    for (std::size_t j = 0; j < d.x.cols(); ++j) {
      if (j) out << ' ';
      if (!d.mask.get(i, j))
        out << '?';
      else
        out << (d.x.get(i, j) ? '1' : '0');
    }
    out << '\n';
  }
}

Dataset load_triplets(std::istream& in, const std::string& name) {
  std::string line;
  std::size_t lineno = 0;
  LabelSink labels;
  bool have_header = false;
  bool in_missing = false;
  std::size_t m = 0, n = 0;
  Dataset d;
  std::set<std::pair<std::size_t, std::size_t>> seen_ones, seen_missing;

  while (std::getline(in, line)) {
    ++lineno;
    line = rstrip(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (labels.take(line)) continue;
      std::string body = line.substr(1);
      std::istringstream cs(body);
      std::string word;
      cs >> word;
      if (word == "missing") {
        if (!have_header) parse_fail(name, lineno, "'# missing' before the size header");
        if (in_missing) parse_fail(name, lineno, "duplicate '# missing' section");
        in_missing = true;
      }
      continue;
    }
    std::istringstream ls(line);
    if (!have_header) {
      std::size_t a = 0, b = 0;
      std::string extra;
      if (!(ls >> a >> b) || (ls >> extra))
        parse_fail(name, lineno, "expected a 'rows cols' header");
      if (a == 0 || b == 0) parse_fail(name, lineno, "matrix dimensions must be positive");
      m = a;
      n = b;
      d.x = BoolMatrix(m, n);
      d.mask = BoolMatrix::ones(m, n);
      have_header = true;
      continue;
    }
    std::size_t i = 0, j = 0;
    std::string extra;
    if (!(ls >> i >> j) || (ls >> extra))
      parse_fail(name, lineno, "expected an 'i j' entry");
    if (i < 1 || i > m || j < 1 || j > n)
      parse_fail(name, lineno, "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                    ") is outside the " + std::to_string(m) + "x" +
                                    std::to_string(n) + " matrix");
    const std::pair<std::size_t, std::size_t> key{i - 1, j - 1};
    if (in_missing) {
      if (seen_ones.count(key))
        parse_fail(name, lineno, "entry is listed both as a one and as missing");
      if (!seen_missing.insert(key).second) parse_fail(name, lineno, "duplicate missing entry");
      d.mask.set(i - 1, j - 1, false);
    } else {
      if (!seen_ones.insert(key).second) parse_fail(name, lineno, "duplicate entry");
      d.x.set(i - 1, j - 1);
    }
  }
  if (!have_header) parse_fail(name, lineno ? lineno : 1, "missing 'rows cols' header");
  d.name = name;
  d.row_labels = std::move(labels.rows);
  d.col_labels = std::move(labels.cols);
  check_labels(d, name.empty() ? "<stream>" : name);
  return d;
}

void save_triplets(const Dataset& d, std::ostream& out) {
  write_labels(d, out);
  out << d.x.rows() << ' ' << d.x.cols() << '\n';
  for (std::size_t i = 0; i < d.x.rows(); ++i)
    d.x.row(i).for_each_set([&](std::size_t j) { out << (i + 1) << ' ' << (j + 1) << '\n'; });
  if (!d.complete()) {
    out << "# missing\n";
    for (std::size_t i = 0; i < d.mask.rows(); ++i)
      for (std::size_t j = 0; j < d.mask.cols(); ++j)
        if (!d.mask.get(i, j)) out << (i + 1) << ' ' << (j + 1) << '\n';
  }
}

namespace {

FileFormat detect_format(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot != std::string::npos) {
    const std::string ext = path.substr(dot + 1);
    if (ext == "tri" || ext == "triplets") return FileFormat::triplets;
  }
  return FileFormat::dense;
}

std::string basename_no_ext(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  return base;
}

}  // namespace

Dataset load_dataset(const std::string& path, FileFormat fmt) {
  std::ifstream in(path);
  if (!in) throw io_error(path + ": cannot open for reading");
  if (fmt == FileFormat::auto_detect) fmt = detect_format(path);
  Dataset d = fmt == FileFormat::triplets ? load_triplets(in, path) : load_dense(in, path);
  d.name = basename_no_ext(path);
  return d;
}

void save_dataset(const Dataset& d, const std::string& path, FileFormat fmt) {
  std::ofstream out(path);
  if (!out) throw io_error(path + ": cannot open for writing");
  if (fmt == FileFormat::auto_detect) fmt = detect_format(path);
  if (fmt == FileFormat::triplets)
    save_triplets(d, out);
  else
    save_dense(d, out);
  if (!out) throw io_error(path + ": write failed");
}

RealMatrix load_dense_real(std::istream& in) {
  struct Cell {
    std::size_t i, j;
    double v;
    bool missing;
  };
  std::vector<Cell> cells;
  LabelSink labels;
  std::size_t n_rows = 0, n_cols = 0;
  scan_dense(in, "", labels, n_cols, n_rows,
             [&](std::size_t i, std::size_t j, const std::string& tok, std::size_t lineno) {
               if (tok == "?") {
                 cells.push_back({i, j, 0.0, true});
                 return;
               }
               try {
                 std::size_t used = 0;
                 const double v = std::stod(tok, &used);
                 if (used != tok.size()) throw std::invalid_argument(tok);
                 cells.push_back({i, j, v, false});
               } catch (const std::exception&) {
                 parse_fail("", lineno, "expected a number or ?, found '" + tok + "'");
               }
             });
  RealMatrix r;
  r.rows = n_rows;
  r.cols = n_cols;
  r.values.assign(n_rows * n_cols, 0.0);
  r.mask = BoolMatrix::ones(n_rows, n_cols);
  for (const Cell& c : cells) {
    if (c.missing)
      r.mask.set(c.i, c.j, false);
    else
      r.values[c.i * n_cols + c.j] = c.v;
  }
  r.row_labels = std::move(labels.rows);
  r.col_labels = std::move(labels.cols);
  return r;
}

RealMatrix load_dense_real_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error(path + ": cannot open for reading");
  return load_dense_real(in);
}

BoolMatrix binarize(const RealMatrix& values, BinarizePolicy policy, double threshold) {
  for (std::size_t i = 0; i < values.rows; ++i)
    for (std::size_t j = 0; j < values.cols; ++j)
      if (values.mask.get(i, j) && !std::isfinite(values.at(i, j)))
        throw std::invalid_argument("binarize: non-finite value at (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
  if (policy == BinarizePolicy::fixed && !std::isfinite(threshold))
    throw std::invalid_argument("binarize: non-finite threshold");

  std::vector<double> cut(values.cols, 0.0);
  std::vector<char> dead(values.cols, 0);  // columns with no observed entry
  if (policy == BinarizePolicy::mean_per_column || policy == BinarizePolicy::median_per_column) {
    for (std::size_t j = 0; j < values.cols; ++j) {
      std::vector<double> obs;
      for (std::size_t i = 0; i < values.rows; ++i)
        if (values.mask.get(i, j)) obs.push_back(values.at(i, j));
      if (obs.empty()) {
        dead[j] = 1;
        continue;
      }
      if (policy == BinarizePolicy::mean_per_column) {
        double s = 0.0;
        for (double v : obs) s += v;
        cut[j] = s / static_cast<double>(obs.size());
      } else {
        std::sort(obs.begin(), obs.end());
        const std::size_t c = obs.size();
        cut[j] = (obs[(c - 1) / 2] + obs[c / 2]) / 2.0;
      }
    }
  }

  BoolMatrix out(values.rows, values.cols);
  for (std::size_t i = 0; i < values.rows; ++i)
    for (std::size_t j = 0; j < values.cols; ++j) {
      if (!values.mask.get(i, j)) continue;
      const double v = values.at(i, j);
      bool bit = false;
      switch (policy) {
        case BinarizePolicy::round: bit = v >= 0.5; break;
        case BinarizePolicy::nonzero: bit = v != 0.0; break;
        case BinarizePolicy::mean_per_column:
        case BinarizePolicy::median_per_column: bit = !dead[j] && v >= cut[j]; break;
        case BinarizePolicy::fixed: bit = v >= threshold; break;
      }
      if (bit) out.set(i, j);
    }
  return out;
}

TopicImportance topic_importance(const BoolMatrix& x, const BoolMatrix& w, const BoolMatrix& h) {
  if (w.rows() != x.rows() || w.cols() != h.rows() || h.cols() != x.cols())
    throw std::invalid_argument("topic_importance: factor shapes do not match the data");
  TopicImportance imp;
  imp.rows = x.rows();
  imp.topics = w.cols();
  imp.counts.assign(imp.rows * imp.topics, 0);
  for (std::size_t i = 0; i < imp.rows; ++i)
    for (std::size_t k = 0; k < imp.topics; ++k)
      if (w.get(i, k))
        imp.counts[i * imp.topics + k] =
            static_cast<std::uint32_t>(and_count(x.row(i), h.row(k)));
  return imp;
}

std::vector<std::vector<TopicWord>> top_words(const TopicImportance& imp, const BoolMatrix& w,
                                              std::size_t top_k,
                                              const std::vector<std::string>& labels) {
  if (w.rows() != imp.rows || w.cols() != imp.topics)
    throw std::invalid_argument("top_words: importance and factor shapes disagree");
  if (labels.size() != imp.rows)
    throw std::invalid_argument("top_words: need one label per row");
  std::vector<std::vector<TopicWord>> out(imp.topics);
  for (std::size_t k = 0; k < imp.topics; ++k) {
    std::vector<TopicWord> words;
    for (std::size_t i = 0; i < imp.rows; ++i)
      if (w.get(i, k)) words.push_back({labels[i], imp.at(i, k), i});
    std::stable_sort(words.begin(), words.end(),
                     [](const TopicWord& a, const TopicWord& b) { return a.count > b.count; });
    if (words.size() > top_k) words.resize(top_k);
    out[k] = std::move(words);
  }
  return out;
}

double relative_error(const BoolMatrix& x, const BoolMatrix& mask, const BoolMatrix& w,
                      const BoolMatrix& h) {
  std::uint64_t observed_ones = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) observed_ones += and_count(mask.row(i), x.row(i));
  if (observed_ones == 0)
    throw std::invalid_argument("relative_error: the data has no observed ones");
  const std::uint64_t err = masked_sq_error(x, mask, bool_product(w, h));
  return std::sqrt(static_cast<double>(err)) / std::sqrt(static_cast<double>(observed_ones));
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "dataset,method,r,seed,time_s,error,error_diff_vs_reference,relative_error_pct\n";
  for (const ReportRow& r : rows) {
    out << csv_escape(r.dataset) << ',' << csv_escape(r.method) << ',' << r.rank << ',' << r.seed
        << ',' << std::fixed << std::setprecision(3) << r.time_s << ',' << r.error << ',';
    if (r.diff_vs_reference) out << *r.diff_vs_reference;
    out << ',' << std::fixed << std::setprecision(2) << r.relative_error_pct << '\n';
  }
}

ReferenceTable ReferenceTable::load(std::istream& in) {
  ReferenceTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = rstrip(line);
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::string dataset;
    std::size_t rank = 0;
    std::uint64_t err = 0;
    if (!(ls >> dataset >> rank >> err)) {
      if (dataset == "dataset") continue;  // header line
      parse_fail("reference table", lineno, "expected dataset,rank,best_error");
    }
    t.best_[{dataset, rank}] = err;
  }
  return t;
}

ReferenceTable ReferenceTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error(path + ": cannot open for reading");
  return ReferenceTable::load(in);
}

std::optional<std::uint64_t> ReferenceTable::best(const std::string& dataset,
                                                  std::size_t rank) const {
  const auto it = best_.find({dataset, rank});
  if (it == best_.end()) return std::nullopt;
  return it->second;
}

}  // namespace bmf
