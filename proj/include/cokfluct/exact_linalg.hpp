#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "cokfluct/partition.hpp"

namespace cokfluct {

/// Dense row-major matrix of arbitrary-precision integers.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols);
  IntMatrix(std::initializer_list<std::initializer_list<long>> rows);

  static IntMatrix identity(std::size_t n);
  static IntMatrix diagonal(const std::vector<long>& values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  mpz_class& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const mpz_class& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  const std::vector<mpz_class>& entries() const { return entries_; }

  bool operator==(const IntMatrix& other) const;

  std::string to_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<mpz_class> entries_;
};

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b);

/// Smith normal form diagonal d_1 | d_2 | ... | d_r with r = min(rows, cols),
/// all entries nonnegative and zeros last. cok(m) = Z^cols / rowspan(m) is
/// isomorphic to (+) Z/d_i (+) Z^(cols - r).
std::vector<mpz_class> snf_diagonal(const IntMatrix& m);

/// Sylow p-subgroup type of the torsion of a cokernel, with the free rank
/// reported alongside rather than folded into the partition.
struct SylowType {
  Partition partition;
  std::size_t free_rank = 0;

  bool operator==(const SylowType&) const = default;
};

SylowType cokernel_partition(const IntMatrix& m, std::uint64_t p);

/// Cokernel type read off an already computed SNF diagonal of an n-column matrix.
SylowType sylow_type_from_diagonal(const std::vector<mpz_class>& diagonal, std::size_t cols, std::uint64_t p);

/// Rank over Q by fraction-free (Bareiss) elimination.
std::size_t exact_rank(const IntMatrix& m);

/// Exponent of p in x (x != 0).
int p_valuation(const mpz_class& x, std::uint64_t p);

}  // namespace cokfluct
