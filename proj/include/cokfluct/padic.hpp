#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <gmpxx.h>

#include "cokfluct/exact_linalg.hpp"
#include "cokfluct/partition.hpp"

namespace cokfluct {

/// Dense matrix of residues in [0, p^N).
class PadicMatrix {
 public:
  PadicMatrix(std::size_t rows, std::size_t cols, std::uint64_t p, int precision);

  /// Reduces an integer matrix modulo p^N.
  static PadicMatrix reduce(const IntMatrix& m, std::uint64_t p, int precision);
  static PadicMatrix identity(std::size_t n, std::uint64_t p, int precision);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint64_t prime() const { return p_; }
  int precision() const { return precision_; }
  const mpz_class& modulus() const { return modulus_; }

  const mpz_class& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
  /// Stores x mod p^N.
  void set(std::size_t r, std::size_t c, const mpz_class& x);
  void set(std::size_t r, std::size_t c, long x) { set(r, c, mpz_class(x)); }

  bool is_zero() const;
  bool operator==(const PadicMatrix& other) const = default;

 private:
  std::size_t rows_, cols_;
  std::uint64_t p_;
  int precision_;
  mpz_class modulus_;
  std::vector<mpz_class> entries_;
};

PadicMatrix operator*(const PadicMatrix& a, const PadicMatrix& b);

/// Elementary-divisor p-valuations recovered from an elimination modulo p^N.
/// `valuations` holds every pivot valuation below N (zeros included), sorted
/// ascending; `saturated_count` positions only satisfy valuation >= N.
struct DivisorValuations {
  std::vector<int> valuations;
  std::size_t saturated_count = 0;
  int precision = 0;

  /// Positive valuations as a partition (the known part of the Sylow type).
  Partition partition() const;

  bool operator==(const DivisorValuations&) const = default;
};

/// Valuation-aware elimination of a square matrix over Z/p^N. Each step
/// pivots on an entry of minimal p-valuation in the remaining block.
DivisorValuations padic_valuations(const PadicMatrix& m);

/// Square matrix given by blocks (i, j), j <= i, with block row i of height
/// n_i and block column j of width n_j. Absent blocks are zero.
class BlockLowerMatrix {
 public:
  BlockLowerMatrix(std::vector<std::size_t> block_sizes, std::uint64_t p, int precision);

  std::size_t block_count() const { return sizes_.size(); }
  const std::vector<std::size_t>& block_sizes() const { return sizes_; }
  std::size_t dimension() const;
  std::uint64_t prime() const { return p_; }
  int precision() const { return precision_; }

  /// Throws StructuralError for blocks above the diagonal that are nonzero
  /// and for shape or ring mismatches. Zero blocks above the diagonal are
  /// accepted and ignored.
  void set_block(std::size_t i, std::size_t j, PadicMatrix block);

  const std::optional<PadicMatrix>& block(std::size_t i, std::size_t j) const;

  PadicMatrix assemble() const;

 private:
  std::vector<std::size_t> sizes_;
  std::uint64_t p_;
  int precision_;
  std::vector<std::vector<std::optional<PadicMatrix>>> blocks_;  // blocks_[i][j], j <= i
};

/// Same result as padic_valuations(m.assemble()), computed block row by block
/// row. Only unit pivots are taken inside a stage; rows and columns without a
/// unit pivot are carried forward, so the working set stays near the block
/// size plus the p-rank of the partial cokernel.
DivisorValuations streaming_block_eliminate(const BlockLowerMatrix& m);

}  // namespace cokfluct
