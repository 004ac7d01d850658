#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "cokfluct/ensembles.hpp"
#include "cokfluct/errors.hpp"
#include "cokfluct/exact_linalg.hpp"
#include "cokfluct/padic.hpp"

using namespace cokfluct;

namespace {

EnsembleSpec block_spec(std::size_t k, std::size_t n, EntryDistribution b) {
  EnsembleSpec spec;
  spec.kind = EnsembleKind::kBlockTriangular;
  spec.p = 2;
  spec.k = k;
  spec.n = n;
  spec.a_dist = EntryDistribution::uniform_range(-5, 5);
  spec.b_dist = std::move(b);
  spec.master_seed = 77;
  return spec;
}

EnsembleSpec product_spec(std::size_t k, std::size_t n) {
  EnsembleSpec spec;
  spec.kind = EnsembleKind::kMatrixProduct;
  spec.p = 3;
  spec.k = k;
  spec.n = n;
  spec.a_dist = EntryDistribution::uniform_range(-4, 4);
  spec.master_seed = 78;
  return spec;
}

// Frequencies of 10^5 draws within 4 standard errors of the exact pmf.
void check_frequencies(const EntryDistribution& dist) {
  const int draws = 100000;
  TrialRng rng(3, 0, Stream::kAuxiliary);
  std::map<std::int64_t, int> counts;
  for (int i = 0; i < draws; ++i) ++counts[dist.sample(rng)];
  double total = 0;
  for (const auto& [v, w] : dist.exact_pmf()) {
    const double q = w.get_d();
    const double se = std::sqrt(q * (1 - q) / draws);
    CHECK_MESSAGE(std::abs(counts[v] / double(draws) - q) <= 4 * se + 1e-12, dist.describe() << " value " << v);
    total += counts[v];
  }
  CHECK(total == draws);  // nothing outside the support
}

}  // namespace

TEST_CASE("entry distributions sample their exact pmf") {
  check_frequencies(EntryDistribution::uniform_mod(5));
  check_frequencies(EntryDistribution::bernoulli(mpq_class(3, 10)));
  check_frequencies(EntryDistribution::uniform_range(-3, 4));
  check_frequencies(EntryDistribution::finite_support({{-1, mpq_class(1, 6)}, {0, mpq_class(1, 2)}, {7, mpq_class(1, 3)}}));
  check_frequencies(EntryDistribution::constant(4));
}

TEST_CASE("balancedness constants") {
  CHECK(EntryDistribution::uniform_mod(4).best_epsilon(2) == mpq_class(1, 2));
  CHECK(EntryDistribution::uniform_range(0, 2).best_epsilon(2) == mpq_class(1, 3));
  CHECK(EntryDistribution::uniform_range(-100, 100).max_residue_mass(2) == mpq_class(101, 201));
  CHECK(EntryDistribution::bernoulli(mpq_class(3, 10)).best_epsilon(2) == mpq_class(3, 10));
  CHECK(EntryDistribution::bernoulli(mpq_class(3, 10)).best_epsilon(3) == mpq_class(3, 10));
  CHECK(EntryDistribution::constant(1).best_epsilon(2) == 0);
  CHECK(EntryDistribution::finite_support({{0, mpq_class(1, 2)}, {3, mpq_class(1, 2)}}).best_epsilon(3) == 0);
  const std::vector<std::uint64_t> primes = {2, 3};
  CHECK(EntryDistribution::uniform_range(0, 5).is_balanced(primes, mpq_class(1, 2)));
  CHECK_FALSE(EntryDistribution::uniform_range(0, 5).is_balanced(primes, mpq_class(3, 4)));
  // residue counting for ranges agrees with the explicit pmf
  for (std::int64_t a : {-7, 0, 3})
    for (std::int64_t b : {a, a + 1, a + 6, a + 20})
      for (std::uint64_t p : {2, 3, 5}) {
        const auto d = EntryDistribution::uniform_range(a, b);
        CHECK(d.max_residue_mass(p) == EntryDistribution::finite_support(d.exact_pmf()).max_residue_mass(p));
      }
}

TEST_CASE("invalid distributions and specs") {
  CHECK_THROWS(EntryDistribution::uniform_range(3, 2));
  CHECK_THROWS(EntryDistribution::bernoulli(mpq_class(3, 2)));
  CHECK_THROWS(EntryDistribution::finite_support({{0, mpq_class(-1, 2)}, {1, mpq_class(3, 2)}}));
  // weights are normalized
  CHECK(EntryDistribution::finite_support({{0, mpq_class(1, 2)}}).exact_pmf()[0].second == 1);

  auto spec = block_spec(3, 2, EntryDistribution::constant(0));
  CHECK_NOTHROW(spec.validate());
  spec.p = 6;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = block_spec(3, 2, EntryDistribution::constant(0));
  spec.block_sizes = {1, 2};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = block_spec(3, 2, EntryDistribution::constant(0));
  spec.a_dist = EntryDistribution::constant(1);
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("A.3"), ConfigError);
  spec = block_spec(3, 2, EntryDistribution::constant(0));
  spec.a_dist = EntryDistribution::uniform_mod(2);
  spec.min_epsilon = mpq_class(3, 4);
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  auto prod = product_spec(2, 2);
  prod.a_dist = EntryDistribution::finite_support({{1, mpq_class(1, 2)}, {4, mpq_class(1, 2)}});
  CHECK_THROWS_AS(prod.validate(), ConfigError);
  prod = product_spec(2, 2);
  prod.zeta = 1.0;
  CHECK_THROWS_AS(prod.validate(), ConfigError);
}

TEST_CASE("precision and k schedule helpers") {
  CHECK(default_precision(2, 16) == 16);
  CHECK(default_precision(2, 1ULL << 20) == 28);
  CHECK(default_precision(3, 10) == 16);
  CHECK(fractional_neg_log(2, 16) == 0.0);
  CHECK(fractional_neg_log(2, 8) == 0.0);
  CHECK(std::abs(fractional_neg_log(2, 6) - (3 - std::log2(6.0))) < 1e-12);
  KSchedule schedule{0.3, {4, 6, 8, 10, 12}};
  const auto ks = schedule.ks(2);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const int m = schedule.m_range[i];
    CHECK(ks[i] >= 2);
    CHECK(std::abs(fractional_neg_log(2, ks[i]) - 0.3) <= 2 * std::pow(2.0, -m));
  }
  CHECK(realized_k(2, 0, 0.5) == 2);
}

TEST_CASE("block sampling layout") {
  SUBCASE("k = 1 is a single A block") {
    const auto s = sample_block_integers(block_spec(1, 2, EntryDistribution::uniform_range(-100, 100)), 0);
    REQUIRE(s.blocks.size() == 1);
    CHECK(s.blocks[0][0].has_value());
    CHECK(s.assemble().rows() == 2);
  }
  SUBCASE("constant 0 B leaves only the bidiagonal blocks") {
    const auto spec = block_spec(3, 2, EntryDistribution::constant(0));
    const auto s = sample_block_integers(spec, 5);
    CHECK_FALSE(s.blocks[2][0].has_value());
    const auto layout = sample_block_layout(spec, 5, 16);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        const bool allowed = j == i || j + 1 == i;
        if (!allowed) CHECK_FALSE(layout.block(i, j).has_value());
      }
    const IntMatrix c = s.assemble();
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t col = 0; col < 6; ++col)
        if (col / 2 > r / 2 || col / 2 + 1 < r / 2) CHECK(c(r, col) == 0);
  }
  SUBCASE("heterogeneous block sizes") {
    auto spec = block_spec(3, 1, EntryDistribution::uniform_range(-1, 1));
    spec.block_sizes = {1, 3, 2};
    CHECK(spec.dimension() == 6);
    CHECK(spec.min_block() == 1);
    CHECK(sample_block_matrix(spec, 0).rows() == 6);
  }
}

TEST_CASE("sampling is deterministic and precision independent") {
  const auto spec = block_spec(4, 3, EntryDistribution::uniform_range(-100, 100));
  CHECK(sample_block_matrix(spec, 9) == sample_block_matrix(spec, 9));
  CHECK_FALSE(sample_block_matrix(spec, 9) == sample_block_matrix(spec, 10));
  const IntMatrix exact = sample_block_integers(spec, 9).assemble();
  CHECK(sample_block_layout(spec, 9, 40).assemble() == PadicMatrix::reduce(exact, 2, 40));
  CHECK(sample_block_layout(spec, 9, 17).assemble() == PadicMatrix::reduce(exact, 2, 17));
}

TEST_CASE("changing B leaves A untouched") {
  const auto with_zero = sample_block_integers(block_spec(4, 2, EntryDistribution::constant(0)), 3);
  const auto with_ones = sample_block_integers(block_spec(4, 2, EntryDistribution::constant(1)), 3);
  const auto with_noise = sample_block_integers(block_spec(4, 2, EntryDistribution::uniform_range(-100, 100)), 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = (i ? i - 1 : 0); j <= i; ++j) {
      CHECK(with_zero.blocks[i][j] == with_ones.blocks[i][j]);
      CHECK(with_zero.blocks[i][j] == with_noise.blocks[i][j]);
    }
  REQUIRE(with_ones.blocks[3][0].has_value());
  for (auto x : with_ones.blocks[3][0]->a) CHECK(x == 1);
}

TEST_CASE("products") {
  SmallIntMatrix a(1, 1), b(1, 1);
  a(0, 0) = 2;
  b(0, 0) = 3;
  const std::vector<SmallIntMatrix> scalars = {a, b};
  CHECK(product_mod(scalars, 5, 3) == PadicMatrix::reduce(IntMatrix{{6}}, 5, 3));

  const auto spec = product_spec(1, 3);
  CHECK(sample_product(spec, 4) == sample_factor_integers(spec, 4)[0].reduce(3, spec.starting_precision()));

  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto factors = sample_factor_integers(product_spec(5, 3), t);
    const IntMatrix exact = product_exact(factors);
    CHECK(product_mod(factors, 3, 20) == PadicMatrix::reduce(exact, 3, 20));
    // associativity after reduction
    const auto r = [&](std::size_t i) { return factors[i].reduce(3, 20); };
    CHECK(((r(0) * r(1)) * r(2)) == (r(0) * (r(1) * r(2))));
  }
}

TEST_CASE("bidiagonal embedding") {
  const std::vector<IntMatrix> one = {IntMatrix{{2}}};
  CHECK(build_bidiagonal_embedding(std::span<const IntMatrix>(one)) == IntMatrix{{2}});
  const std::vector<IntMatrix> two = {IntMatrix{{2}}, IntMatrix{{3}}};
  CHECK(build_bidiagonal_embedding(std::span<const IntMatrix>(two)) == IntMatrix{{2, 0}, {1, 3}});
  const std::vector<PadicMatrix> padic = {PadicMatrix::reduce(IntMatrix{{2}}, 2, 8),
                                          PadicMatrix::reduce(IntMatrix{{3}}, 2, 8)};
  CHECK(build_bidiagonal_embedding(std::span<const PadicMatrix>(padic)) ==
        PadicMatrix::reduce(IntMatrix{{2, 0}, {1, 3}}, 2, 8));
  const std::vector<IntMatrix> bad = {IntMatrix{{1}}, IntMatrix{{1, 0}, {0, 1}}};
  CHECK_THROWS_AS(build_bidiagonal_embedding(std::span<const IntMatrix>(bad)), StructuralError);

  // same cokernel as the product
  for (std::uint64_t t = 0; t < 50; ++t) {
    TrialRng rng(31, t, Stream::kAuxiliary);
    const std::size_t n = 1 + rng.bounded(3), k = 1 + rng.bounded(4);
    std::vector<IntMatrix> factors;
    for (std::size_t i = 0; i < k; ++i) {
      IntMatrix m(n, n);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) m(r, c) = static_cast<long>(rng.bounded(11)) - 5;
      factors.push_back(m);
    }
    IntMatrix product = factors[0];
    for (std::size_t i = 1; i < k; ++i) product = product * factors[i];
    const IntMatrix embedded = build_bidiagonal_embedding(std::span<const IntMatrix>(factors));
    for (std::uint64_t p : {2, 3})
      CHECK(cokernel_partition(embedded, p) == cokernel_partition(product, p));
  }
}
