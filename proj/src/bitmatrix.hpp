#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "bitvec.hpp"

namespace bmf {

// Dense 0/1 matrix stored as packed rows. A packed column mirror is built
// lazily on first column access and invalidated by any mutation, so code can
// freely mix row- and column-oriented passes without paying for transposes it
// never uses.
class BoolMatrix {
 public:
  BoolMatrix() = default;
  BoolMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), row_(rows, BitVec(cols)) {}

  BoolMatrix(const BoolMatrix& o) : rows_(o.rows_), cols_(o.cols_), row_(o.row_) {}
  BoolMatrix(BoolMatrix&& o) noexcept
      : rows_(o.rows_), cols_(o.cols_), row_(std::move(o.row_)) {}
  BoolMatrix& operator=(const BoolMatrix& o) {
    if (this != &o) {
      rows_ = o.rows_;
      cols_ = o.cols_;
      row_ = o.row_;
      drop_col_mirror();
    }
    return *this;
  }
  BoolMatrix& operator=(BoolMatrix&& o) noexcept {
    if (this != &o) {
      rows_ = o.rows_;
      cols_ = o.cols_;
      row_ = std::move(o.row_);
      drop_col_mirror();
    }
    return *this;
  }

  static BoolMatrix identity(std::size_t n) {
    BoolMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.row_[i].set(i);
    return m;
  }

  static BoolMatrix ones(std::size_t rows, std::size_t cols) {
    BoolMatrix m(rows, cols);
    for (auto& r : m.row_) r = BitVec::ones(cols);
    return m;
  }

  static BoolMatrix from_rows(const std::vector<std::vector<int>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  bool get(std::size_t i, std::size_t j) const {
    assert(i < rows_ && "row index out of range");
    return row_[i].get(j);
  }

  void set(std::size_t i, std::size_t j, bool v = true) {
    assert(i < rows_ && "row index out of range");
    row_[i].set(j, v);
    cols_clean_.store(false, std::memory_order_release);
  }

  const BitVec& row(std::size_t i) const {
    assert(i < rows_ && "row index out of range");
    return row_[i];
  }

  void set_row(std::size_t i, BitVec v) {
    assert(i < rows_ && "row index out of range");
    if (v.size() != cols_) throw std::invalid_argument("BoolMatrix::set_row: length mismatch");
    row_[i] = std::move(v);
    cols_clean_.store(false, std::memory_order_release);
  }

  // Packed column; triggers a full mirror rebuild if any mutation happened
  // since the last column access. The reference stays valid until the next
  // mutation of the matrix.
  const BitVec& col(std::size_t j) const {
    assert(j < cols_ && "column index out of range");
    if (!cols_clean_.load(std::memory_order_acquire)) build_cols();
    return col_[j];
  }

  BitVec col_copy(std::size_t j) const { return col(j); }

  BoolMatrix transposed() const;

  std::uint64_t ones_count() const {
    std::uint64_t c = 0;
    for (const auto& r : row_) c += r.count();
    return c;
  }

  bool operator==(const BoolMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && row_ == o.row_;
  }
  bool operator!=(const BoolMatrix& o) const { return !(*this == o); }

  // One line of '0'/'1' characters per row.
  std::string to_string() const;

 private:
  void build_cols() const;
  void drop_col_mirror() {
    col_.clear();
    cols_clean_.store(false, std::memory_order_release);
  }

  std::size_t rows_ = 0, cols_ = 0;
  std::vector<BitVec> row_;

  mutable std::vector<BitVec> col_;
  mutable std::atomic<bool> cols_clean_{false};
  mutable std::mutex col_mu_;
};

// Boolean product: out(i,j) = OR_k (w(i,k) AND h(k,j)). Row i of the result
// is the OR of the rows of h selected by row i of w.
BoolMatrix bool_product(const BoolMatrix& w, const BoolMatrix& h);

// Squared Frobenius distance between 0/1 matrices restricted to mask = 1,
// i.e. the number of observed positions where x and a disagree.
std::uint64_t masked_sq_error(const BoolMatrix& x, const BoolMatrix& mask, const BoolMatrix& a);
std::uint64_t sq_error(const BoolMatrix& x, const BoolMatrix& a);

struct ErrorSplit {
  std::uint64_t missed_ones = 0;  // observed 1s left uncovered
  std::uint64_t wrong_ones = 0;   // observed 0s covered anyway
  std::uint64_t total() const { return missed_ones + wrong_ones; }
};
ErrorSplit masked_error_split(const BoolMatrix& x, const BoolMatrix& mask, const BoolMatrix& a);

bool is_all_ones(const BoolMatrix& m);

}  // namespace bmf
