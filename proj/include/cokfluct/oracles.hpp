#pragma once

// Exact brute-force checks at tiny scale. Every probability here is an
// exact rational; nothing in an equality test goes through floating point.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "cokfluct/exact_linalg.hpp"
#include "cokfluct/pgroups.hpp"

namespace cokfluct {

using Pmf = std::vector<std::pair<std::int64_t, mpq_class>>;

/// Independent entries, each with its own finite pmf.
struct FiniteSupportMatrixLaw {
  std::size_t rows = 0, cols = 0;
  std::vector<Pmf> entries;  ///< row-major

  static FiniteSupportMatrixLaw iid(std::size_t rows, std::size_t cols, const Pmf& pmf);

  const Pmf& entry(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
  /// Throws DomainError unless every entry pmf is nonempty, positive and sums to 1.
  void validate() const;
};

/// Uniform pmf on {a, ..., b}.
Pmf uniform_pmf(std::int64_t a, std::int64_t b);

/// pmf of sum_c x_c * g_c + shift in G for independent x_c ~ pmfs[c].
std::vector<mpq_class> linear_form_pmf(const AbelianPGroup& g, std::span<const Pmf> pmfs,
                                       std::span<const AbelianPGroup::Element> coeffs,
                                       AbelianPGroup::Element shift = 0);

/// True iff the elements generate all of G (tested on G / pG).
bool generates(const AbelianPGroup& g, std::span<const AbelianPGroup::Element> elements);

struct IdentityCheck {
  mpq_class lhs, rhs;
  bool equal = false;
};

/// lhs = E|Hom(cok M, G)| by SNF of every matrix in the support,
/// rhs = sum_{g in G^n} P(Mg = 0) by counting solutions of every matrix.
/// Square laws with n <= 2 and at most 10^6 matrices.
IdentityCheck verify_moment_identity(const FiniteSupportMatrixLaw& law, const AbelianPGroup& g);

struct BalancedSums {
  mpq_class s_min, s_max;
};

/// S_min / S_max = sum over generating g in G0^n of min_f / max_f P(Mg = f).
/// Rows are independent so both factor over rows. Guard: |G0|^n <= 10^7.
BalancedSums verify_balanced_sums(const FiniteSupportMatrixLaw& law, const AbelianPGroup& g0);

struct ResidualBound {
  mpq_class probability, bound, epsilon;
  bool holds = false;
};

/// P(f + Mg in G0^m) for an m x n matrix with iid rows whose entries follow
/// row_law, against (1 - eps)^m with eps the smallest certified
/// balancedness constant of the entries at p. Throws DomainError when
/// <g> is contained in G0. An empty f means f = 0.
ResidualBound verify_residual_bound(std::span<const Pmf> row_law, const AbelianPGroup& g, const Subgroup& g0,
                                    std::span<const AbelianPGroup::Element> vec, std::size_t m,
                                    std::span<const AbelianPGroup::Element> f = {});

/// Compares the cokernels of the bidiagonal embedding and of the product.
/// Guard: n * k <= 24.
bool verify_cok_identity(const std::vector<IntMatrix>& factors);

/// Multiset of invariant factors other than 1 (zeros stand for free summands).
std::vector<mpz_class> cokernel_invariants(const IntMatrix& m);

struct WtStatistics {
  int w = 0;
  int t = 0;
  std::vector<std::size_t> tyg;  ///< lattice indices of <g_1>, ..., <g_k>
};

/// w and t of a subgroup sequence H_1..H_k (H_0 = {0}).
WtStatistics wt_of_sequence(const SubgroupLattice& lattice, std::span<const std::size_t> h);

/// w, t and tyg of g in G^n split into consecutive blocks of the given sizes.
WtStatistics wt_statistics(const SubgroupLattice& lattice, std::span<const AbelianPGroup::Element> g,
                           std::span<const std::size_t> block_sizes);

/// t(H) <= ell(G) (1 + w(H)).
bool verify_chain_claim(const SubgroupLattice& lattice, std::span<const std::size_t> h);

/// |{H in Sg(G)^k : w(H) = 0, t(H) = i}| by dynamic programming over sequences.
mpz_class count_w0_sequences(const SubgroupLattice& lattice, std::size_t k, int i);

mpz_class binomial(std::size_t n, std::size_t k);

/// Block lower bidiagonal law at tiny scale: A-blocks (diagonal and
/// subdiagonal) with iid entries from a_pmf, plus a fixed integer matrix
/// b_fixed supported on blocks (i, j) with j <= i - 2.
struct TinyBlockLaw {
  std::vector<std::size_t> block_sizes;
  Pmf a_pmf;
  IntMatrix b_fixed;  ///< empty means zero
};

struct W0Decomposition {
  mpq_class sum;     ///< sum over g with w = 0, t = i of P(Cg = 0)
  mpq_class target;  ///< c(G, i) * C(k, i)
  mpz_class sequence_count;  ///< |{H : w = 0, t = i}|
  std::size_t vector_count = 0;  ///< number of g entering the sum
};

/// Exact sum via the row factorization of P(Cg = 0). Guard: |G|^n <= 10^6.
W0Decomposition verify_w0_decomposition(const TinyBlockLaw& law, const AbelianPGroup& g, int i);

/// Outcome of a named verification suite.
struct SuiteResult {
  std::string name;
  std::size_t passed = 0;
  std::size_t total = 0;

  bool ok() const { return passed == total; }
};

inline const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {"identity", "balanced", "cok", "chains", "decomposition"};
  return names;
}

/// Runs one suite ("identity", "balanced", "cok", "chains", "decomposition"
/// or "all"), printing one line per check to out. Throws ConfigError for an
/// unknown suite name.
std::vector<SuiteResult> run_verify_suite(const std::string& suite, std::ostream& out, std::uint64_t seed = 1);

}  // namespace cokfluct
