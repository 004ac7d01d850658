#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "cokfluct/padic.hpp"
#include "cokfluct/rng.hpp"

namespace cokfluct {

/// Integer-valued entry law. Probabilities are exact rationals; sampling
/// uses their double images.
class EntryDistribution {
 public:
  enum class Kind { kUniformMod, kBernoulli, kUniformRange, kFiniteSupport, kConstant };

  static EntryDistribution uniform_mod(std::int64_t m);
  static EntryDistribution bernoulli(mpq_class q);
  static EntryDistribution uniform_range(std::int64_t a, std::int64_t b);
  static EntryDistribution finite_support(std::vector<std::pair<std::int64_t, mpq_class>> weighted);
  static EntryDistribution constant(std::int64_t v);

  Kind kind() const { return kind_; }
  std::int64_t lo() const { return lo_; }  ///< range start; modulus for uniform_mod; value for constant
  std::int64_t hi() const { return hi_; }
  const mpq_class& bernoulli_q() const { return q_; }
  const std::vector<std::pair<std::int64_t, mpq_class>>& support() const { return support_; }

  std::int64_t sample(TrialRng& rng) const;

  /// Exact pmf as (value, probability) pairs; throws GuardError when the
  /// support is larger than max_support.
  std::vector<std::pair<std::int64_t, mpq_class>> exact_pmf(std::size_t max_support = 1u << 20) const;

  /// max_r P(X = r mod p), computed exactly.
  mpq_class max_residue_mass(std::uint64_t p) const;
  /// Largest eps for which X is (p, eps)-balanced: 1 - max_residue_mass(p).
  mpq_class best_epsilon(std::uint64_t p) const;
  /// True iff best_epsilon(p) >= eps and best_epsilon(p) > 0 for every p in primes.
  bool is_balanced(std::span<const std::uint64_t> primes, const mpq_class& eps) const;

  std::string describe() const;

  bool operator==(const EntryDistribution& other) const;

 private:
  EntryDistribution() = default;
  void build_cumulative();

  Kind kind_ = Kind::kConstant;
  std::int64_t lo_ = 0, hi_ = 0;
  mpq_class q_ = 0;
  std::vector<std::pair<std::int64_t, mpq_class>> support_;
  std::vector<double> cumulative_;
};

enum class EnsembleKind { kBlockTriangular, kMatrixProduct, kBidiagonalEmbedding };

std::string to_string(EnsembleKind kind);
EnsembleKind parse_ensemble_kind(const std::string& name);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::kBlockTriangular;
  std::uint64_t p = 2;
  std::size_t k = 1;
  std::vector<std::size_t> block_sizes;  ///< block_triangular; empty means n for every block
  std::size_t n = 1;                     ///< factor size (and default block size)
  EntryDistribution a_dist = EntryDistribution::uniform_range(-100, 100);
  EntryDistribution b_dist = EntryDistribution::uniform_range(-100, 100);
  std::uint64_t master_seed = 0;
  int precision = 0;              ///< starting precision N; 0 selects default_precision(p, k)
  std::optional<double> zeta;     ///< centering target; defaults to frac(-log_p k)
  mpq_class min_epsilon = 0;      ///< required balancedness of a_dist

  /// Effective block sizes (k copies of n unless given).
  std::vector<std::size_t> sizes() const;
  std::size_t dimension() const;
  int starting_precision() const;
  double zeta_target() const;
  /// min block size, the n_bullet of the growth conditions.
  std::size_t min_block() const;

  /// Throws ConfigError on an invalid configuration.
  void validate() const;

  bool operator==(const EnsembleSpec&) const = default;
};

/// max(16, ceil(log_p k) + 8).
int default_precision(std::uint64_t p, std::uint64_t k);

/// Fractional part of -log_p k.
double fractional_neg_log(std::uint64_t p, std::uint64_t k);

/// k(m) = round(p^(m - zeta)), clamped to at least 2.
std::uint64_t realized_k(std::uint64_t p, int m, double zeta);

struct KSchedule {
  double zeta_target = 0.0;
  std::vector<int> m_range;

  std::vector<std::uint64_t> ks(std::uint64_t p) const;
};

/// Small-integer dense matrix as drawn by the samplers, before reduction.
struct SmallIntMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::int64_t> a;

  SmallIntMatrix() = default;
  SmallIntMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0) {}
  std::int64_t& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  std::int64_t operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

  IntMatrix to_int_matrix() const;
  PadicMatrix reduce(std::uint64_t p, int precision) const;
  bool operator==(const SmallIntMatrix&) const = default;
};

/// Integer blocks of one block-triangular trial; blocks[i][j] for j <= i,
/// empty optional for structurally or distributionally zero blocks.
struct BlockSample {
  std::vector<std::size_t> sizes;
  std::vector<std::vector<std::optional<SmallIntMatrix>>> blocks;

  BlockLowerMatrix reduce(std::uint64_t p, int precision) const;
  IntMatrix assemble() const;
};

BlockSample sample_block_integers(const EnsembleSpec& spec, std::uint64_t trial);
std::vector<SmallIntMatrix> sample_factor_integers(const EnsembleSpec& spec, std::uint64_t trial);

/// C = A + B assembled and reduced at the ensemble's starting precision.
PadicMatrix sample_block_matrix(const EnsembleSpec& spec, std::uint64_t trial);
/// Same trial as a block layout at an explicit precision.
BlockLowerMatrix sample_block_layout(const EnsembleSpec& spec, std::uint64_t trial, int precision);

/// A_1 A_2 ... A_k, every intermediate reduced mod p^N.
PadicMatrix sample_product(const EnsembleSpec& spec, std::uint64_t trial);
PadicMatrix product_mod(std::span<const SmallIntMatrix> factors, std::uint64_t p, int precision);
/// Exact integer product.
IntMatrix product_exact(std::span<const SmallIntMatrix> factors);

/// The nk x nk matrix with the factors on the block diagonal and identity
/// blocks directly below it.
PadicMatrix build_bidiagonal_embedding(std::span<const PadicMatrix> factors);
BlockLowerMatrix bidiagonal_layout(std::span<const PadicMatrix> factors);

/// Integer version, for exact checks.
IntMatrix build_bidiagonal_embedding(std::span<const IntMatrix> factors);

}  // namespace cokfluct
