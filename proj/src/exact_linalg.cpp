#include "cokfluct/exact_linalg.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace cokfluct {

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols) {}

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<long>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  entries_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw std::invalid_argument("ragged IntMatrix initializer");
    for (long v : row) entries_.emplace_back(v);
  }
}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::diagonal(const std::vector<long>& values) {
  IntMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

bool IntMatrix::operator==(const IntMatrix& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ && entries_ == other.entries_;
}

std::string IntMatrix::to_string() const {
  std::ostringstream out;
  out << '[';
  for (std::size_t r = 0; r < rows_; ++r) {
    out << (r ? ",[" : "[");
    for (std::size_t c = 0; c < cols_; ++c) out << (c ? "," : "") << (*this)(r, c);
    out << ']';
  }
  out << ']';
  return out.str();
}

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("IntMatrix product shape mismatch");
  IntMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += a(i, k) * b(k, j);
    }
  return out;
}

namespace {

// Working copy with in-place row/column operations on the trailing block.
class SnfWork {
 public:
  explicit SnfWork(const IntMatrix& m) : rows_(m.rows()), cols_(m.cols()), a_(m.entries()) {}

  mpz_class& at(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }

  void swap_rows(std::size_t r1, std::size_t r2) {
    if (r1 == r2) return;
    for (std::size_t c = 0; c < cols_; ++c) std::swap(at(r1, c), at(r2, c));
  }
  void swap_cols(std::size_t c1, std::size_t c2) {
    if (c1 == c2) return;
    for (std::size_t r = 0; r < rows_; ++r) std::swap(at(r, c1), at(r, c2));
  }

  // Moves the nonzero entry of least absolute value in [t.., t..] to (t, t).
  bool place_min_pivot(std::size_t t) {
    std::size_t br = rows_, bc = cols_;
    for (std::size_t r = t; r < rows_; ++r)
      for (std::size_t c = t; c < cols_; ++c) {
        const mpz_class& v = at(r, c);
        if (v == 0) continue;
        if (br == rows_ || mpz_cmpabs(v.get_mpz_t(), at(br, bc).get_mpz_t()) < 0) {
          br = r;
          bc = c;
          if (v == 1 || v == -1) goto found;
        }
      }
    if (br == rows_) return false;
  found:
    swap_rows(t, br);
    swap_cols(t, bc);
    return true;
  }

  // Reduces column t below and row t right of the pivot; returns true once
  // both are clear.
  bool reduce_cross(std::size_t t) {
    bool clean = true;
    mpz_class q;
    const mpz_class& piv = at(t, t);
    for (std::size_t r = t + 1; r < rows_; ++r) {
      if (at(r, t) == 0) continue;
      mpz_tdiv_q(q.get_mpz_t(), at(r, t).get_mpz_t(), piv.get_mpz_t());
      for (std::size_t c = t; c < cols_; ++c)
        if (at(t, c) != 0) at(r, c) -= q * at(t, c);
      if (at(r, t) != 0) clean = false;
    }
    for (std::size_t c = t + 1; c < cols_; ++c) {
      if (at(t, c) == 0) continue;
      mpz_tdiv_q(q.get_mpz_t(), at(t, c).get_mpz_t(), piv.get_mpz_t());
      for (std::size_t r = t; r < rows_; ++r)
        if (at(r, t) != 0) at(r, c) -= q * at(r, t);
      if (at(t, c) != 0) clean = false;
    }
    return clean;
  }

  // After the cross is clear, finds an entry of the trailing block not
  // divisible by the pivot and folds its row into row t.
  bool fix_divisibility(std::size_t t) {
    const mpz_class& piv = at(t, t);
    for (std::size_t r = t + 1; r < rows_; ++r)
      for (std::size_t c = t + 1; c < cols_; ++c)
        if (!mpz_divisible_p(at(r, c).get_mpz_t(), piv.get_mpz_t())) {
          for (std::size_t cc = t; cc < cols_; ++cc) at(t, cc) += at(r, cc);
          return false;
        }
    return true;
  }

  std::vector<mpz_class> run() {
    const std::size_t r_max = std::min(rows_, cols_);
    std::vector<mpz_class> diag(r_max);
    for (std::size_t t = 0; t < r_max; ++t) {
      if (!place_min_pivot(t)) break;
      for (;;) {
        if (!reduce_cross(t)) {
          place_min_pivot(t);
          continue;
        }
        if (fix_divisibility(t)) break;
      }
      diag[t] = abs(at(t, t));
    }
    return diag;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<mpz_class> a_;
};

}  // namespace

std::vector<mpz_class> snf_diagonal(const IntMatrix& m) { return SnfWork(m).run(); }

int p_valuation(const mpz_class& x, std::uint64_t p) {
  if (x == 0) throw std::domain_error("valuation of zero");
  mpz_class rest, pp(static_cast<unsigned long>(p));
  return static_cast<int>(mpz_remove(rest.get_mpz_t(), x.get_mpz_t(), pp.get_mpz_t()));
}

SylowType sylow_type_from_diagonal(const std::vector<mpz_class>& diagonal, std::size_t cols, std::uint64_t p) {
  SylowType out;
  std::vector<int> vals;
  for (const auto& d : diagonal) {
    if (d == 0) {
      ++out.free_rank;
      continue;
    }
    const int v = p_valuation(d, p);
    if (v > 0) vals.push_back(v);
  }
  out.free_rank += cols - diagonal.size();
  out.partition = Partition::from_unsorted(std::move(vals));
  return out;
}

SylowType cokernel_partition(const IntMatrix& m, std::uint64_t p) {
  if (m.rows() != m.cols()) throw std::invalid_argument("cokernel_partition expects a square matrix");
  return sylow_type_from_diagonal(snf_diagonal(m), m.cols(), p);
}

std::size_t exact_rank(const IntMatrix& m) {
  std::vector<mpz_class> a = m.entries();
  const std::size_t rows = m.rows(), cols = m.cols();
  auto at = [&](std::size_t r, std::size_t c) -> mpz_class& { return a[r * cols + c]; };
  mpz_class prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rows;
    for (std::size_t r = rank; r < rows; ++r)
      if (at(r, c) != 0) {
        piv = r;
        break;
      }
    if (piv == rows) continue;
    if (piv != rank)
      for (std::size_t cc = 0; cc < cols; ++cc) std::swap(at(piv, cc), at(rank, cc));
    for (std::size_t r = rank + 1; r < rows; ++r) {
      for (std::size_t cc = c + 1; cc < cols; ++cc) {
        at(r, cc) = at(rank, c) * at(r, cc) - at(r, c) * at(rank, cc);
        mpz_divexact(at(r, cc).get_mpz_t(), at(r, cc).get_mpz_t(), prev.get_mpz_t());
      }
      at(r, c) = 0;
    }
    prev = at(rank, c);
    ++rank;
  }
  return rank;
}

}  // namespace cokfluct
