#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "cokfluct/partition.hpp"

namespace cokfluct {

/// G_lambda = Z/p^{lambda_1} + ... + Z/p^{lambda_r}.
///
/// Elements are encoded as mixed-radix indices in [0, |G|): digit i lives in
/// Z/p^{lambda_i} and digit 0 is the most significant.
class AbelianPGroup {
 public:
  using Element = std::uint32_t;

  /// Largest group whose elements may be enumerated.
  static constexpr std::uint64_t kMaxEnumerableOrder = 4096;

  AbelianPGroup(std::uint64_t p, Partition lambda);

  std::uint64_t prime() const { return p_; }
  const Partition& lambda() const { return lambda_; }
  std::size_t rank() const { return lambda_.length(); }
  mpz_class order() const;

  /// Element count; throws GuardError above kMaxEnumerableOrder.
  std::size_t element_count() const;

  Element zero() const { return 0; }
  Element add(Element a, Element b) const;
  Element neg(Element a) const;
  Element scale(Element a, std::int64_t m) const;
  std::uint64_t element_order(Element a) const;

  std::vector<std::uint64_t> digits(Element a) const;
  Element from_digits(std::span<const std::int64_t> digits) const;

  /// Cyclic generator of the i-th summand.
  Element generator(std::size_t i) const;

  bool operator==(const AbelianPGroup& other) const { return p_ == other.p_ && lambda_ == other.lambda_; }

 private:
  std::uint64_t p_;
  Partition lambda_;
  std::vector<std::uint64_t> moduli_;   // p^{lambda_i}
  std::vector<std::uint64_t> weights_;  // place values of the mixed radix
  std::uint64_t order_ = 1;             // saturates for huge groups; only used under the guard
  bool enumerable_ = true;
};

/// Longest strict subgroup chain length, = |lambda|.
int ell(const AbelianPGroup& g);

/// |Hom(G_lambda, G_mu)| = p^{sum_{i,j} min(lambda_i, mu_j)}.
mpz_class hom_count(const Partition& lambda, const Partition& mu, std::uint64_t p);

/// Subgroup stored as its sorted element list plus a membership bitset.
struct Subgroup {
  std::vector<AbelianPGroup::Element> elements;
  std::vector<std::uint64_t> bits;

  std::size_t order() const { return elements.size(); }
  bool contains(AbelianPGroup::Element x) const { return (bits[x >> 6] >> (x & 63)) & 1U; }
  bool is_subset_of(const Subgroup& other) const;
  bool operator==(const Subgroup& other) const { return bits == other.bits; }
};

/// Subgroup generated by the given elements.
Subgroup generated_subgroup(const AbelianPGroup& g, std::span<const AbelianPGroup::Element> gens);

/// All subgroups of a group, each exactly once, ordered by (order, element
/// list). Index 0 is the trivial subgroup and the last index is the group.
class SubgroupLattice {
 public:
  static constexpr std::size_t kDefaultMaxSubgroups = 6000;

  const AbelianPGroup& group() const { return group_; }
  std::size_t size() const { return subgroups_.size(); }
  const Subgroup& subgroup(std::size_t i) const { return subgroups_[i]; }
  const std::vector<Subgroup>& subgroups() const { return subgroups_; }

  std::size_t trivial_index() const { return 0; }
  std::size_t full_index() const { return subgroups_.size() - 1; }

  /// H_i subset-or-equal H_j.
  bool contains(std::size_t i, std::size_t j) const;
  /// Indices i with H_i a proper subgroup of H_j.
  const std::vector<std::uint32_t>& strictly_below(std::size_t j) const { return below_[j]; }

  /// Index of a subgroup of the same group; throws if absent.
  std::size_t index_of(const Subgroup& h) const;
  std::size_t index_of_generated(std::span<const AbelianPGroup::Element> gens) const;

 private:
  friend SubgroupLattice enumerate_subgroups(const AbelianPGroup&, std::size_t);
  explicit SubgroupLattice(AbelianPGroup g) : group_(std::move(g)) {}

  AbelianPGroup group_;
  std::vector<Subgroup> subgroups_;
  std::vector<std::vector<std::uint32_t>> below_;
};

/// Throws GuardError if |G| > 4096 or the lattice exceeds max_subgroups.
SubgroupLattice enumerate_subgroups(const AbelianPGroup& g,
                                    std::size_t max_subgroups = SubgroupLattice::kDefaultMaxSubgroups);

/// c(G, i): number of strict chains {0} < H_1 < ... < H_i of subgroups of G.
mpz_class chain_count(const SubgroupLattice& lattice, int i);
mpz_class chain_count(const AbelianPGroup& g, int i);

/// c(G, 0), ..., c(G, ell(G)).
std::vector<mpz_class> chain_counts(const SubgroupLattice& lattice);

}  // namespace cokfluct
