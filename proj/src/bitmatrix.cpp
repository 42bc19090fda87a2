#include "bitmatrix.hpp"

namespace bmf {

BoolMatrix BoolMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m ? rows[0].size() : 0;
  BoolMatrix out(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].size() != n)
      throw std::invalid_argument("BoolMatrix::from_rows: ragged row lengths");
    for (std::size_t j = 0; j < n; ++j)
      if (rows[i][j]) out.row_[i].set(j);
  }
  return out;
}

void BoolMatrix::build_cols() const {
  std::lock_guard<std::mutex> lock(col_mu_);
  if (cols_clean_.load(std::memory_order_relaxed)) return;  // lost the race: already rebuilt
  col_.assign(cols_, BitVec(rows_));
  for (std::size_t i = 0; i < rows_; ++i)
    row_[i].for_each_set([&](std::size_t j) { col_[j].set(i); });
  cols_clean_.store(true, std::memory_order_release);
}

BoolMatrix BoolMatrix::transposed() const {
  BoolMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    row_[i].for_each_set([&](std::size_t j) { t.row_[j].set(i); });
  return t;
}

std::string BoolMatrix::to_string() const {
  std::string s;
  s.reserve(rows_ * (cols_ + 1));
  for (std::size_t i = 0; i < rows_; ++i) {
    s += row_[i].to_string();
    if (i + 1 < rows_) s += '\n';
  }
  return s;
}

BoolMatrix bool_product(const BoolMatrix& w, const BoolMatrix& h) {
  if (w.cols() != h.rows())
    throw std::invalid_argument("bool_product: inner dimensions disagree");
  BoolMatrix out(w.rows(), h.cols());
  BitVec acc(h.cols());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    acc.clear();
    w.row(i).for_each_set([&](std::size_t k) { acc |= h.row(k); });
    out.set_row(i, acc);
  }
  return out;
}

std::uint64_t masked_sq_error(const BoolMatrix& x, const BoolMatrix& mask, const BoolMatrix& a) {
  if (x.rows() != mask.rows() || x.cols() != mask.cols() || x.rows() != a.rows() ||
      x.cols() != a.cols())
    throw std::invalid_argument("masked_sq_error: shape mismatch");
  std::uint64_t e = 0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    e += masked_hamming(mask.row(i), x.row(i), a.row(i));
  return e;
}

std::uint64_t sq_error(const BoolMatrix& x, const BoolMatrix& a) {
  if (x.rows() != a.rows() || x.cols() != a.cols())
    throw std::invalid_argument("sq_error: shape mismatch");
  std::uint64_t e = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) e += hamming(x.row(i), a.row(i));
  return e;
}

ErrorSplit masked_error_split(const BoolMatrix& x, const BoolMatrix& mask, const BoolMatrix& a) {
  if (x.rows() != mask.rows() || x.cols() != mask.cols() || x.rows() != a.rows() ||
      x.cols() != a.cols())
    throw std::invalid_argument("masked_error_split: shape mismatch");
  ErrorSplit s;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto& xw = x.row(i).words();
    const auto& mw = mask.row(i).words();
    const auto& aw = a.row(i).words();
    for (std::size_t t = 0; t < xw.size(); ++t) {
      s.missed_ones += static_cast<std::uint64_t>(std::popcount(mw[t] & xw[t] & ~aw[t]));
      s.wrong_ones += static_cast<std::uint64_t>(std::popcount(mw[t] & ~xw[t] & aw[t]));
    }
  }
  return s;
}

bool is_all_ones(const BoolMatrix& m) {
  return m.ones_count() == static_cast<std::uint64_t>(m.rows()) * m.cols();
}

}  // namespace bmf
