#include <doctest.h>

#include <numeric>
#include <sstream>
#include <vector>

#include "cokfluct/ensembles.hpp"
#include "cokfluct/errors.hpp"
#include "cokfluct/oracles.hpp"
#include "cokfluct/rng.hpp"

using namespace cokfluct;
using Element = AbelianPGroup::Element;

namespace {

bool next_digits(std::vector<std::size_t>& digits, std::size_t radix) {
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (++digits[i] < radix) return true;
    digits[i] = 0;
  }
  return false;
}

// Sum over g with w = 0, t = i of P(Cg = 0), by enumerating every A in the
// support and evaluating Cg directly. No row factorization.
mpq_class w0_sum_by_matrices(const TinyBlockLaw& law, const AbelianPGroup& g, int i) {
  const auto& sizes = law.block_sizes;
  const std::size_t k = sizes.size();
  const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  std::vector<std::size_t> offset(k + 1, 0);
  for (std::size_t b = 0; b < k; ++b) offset[b + 1] = offset[b] + sizes[b];
  std::vector<std::pair<std::size_t, std::size_t>> a_cells;
  for (std::size_t br = 0; br < k; ++br)
    for (std::size_t r = offset[br]; r < offset[br + 1]; ++r)
      for (std::size_t c = (br ? offset[br - 1] : 0); c < offset[br + 1]; ++c) a_cells.emplace_back(r, c);

  const auto lattice = enumerate_subgroups(g);
  const std::size_t order = g.element_count();
  std::vector<std::vector<Element>> vectors;
  std::vector<std::size_t> gv(n, 0);
  do {
    std::vector<Element> v(gv.begin(), gv.end());
    const auto st = wt_statistics(lattice, v, sizes);
    if (st.w == 0 && st.t == i) vectors.push_back(v);
  } while (next_digits(gv, order));

  mpq_class total = 0;
  std::vector<std::size_t> pick(a_cells.size(), 0);
  do {
    std::vector<std::vector<std::int64_t>> c(n, std::vector<std::int64_t>(n, 0));
    mpq_class prob = 1;
    for (std::size_t e = 0; e < a_cells.size(); ++e) {
      c[a_cells[e].first][a_cells[e].second] = law.a_pmf[pick[e]].first;
      prob *= law.a_pmf[pick[e]].second;
    }
    if (law.b_fixed.rows() != 0)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t col = 0; col < n; ++col) c[r][col] += law.b_fixed(r, col).get_si();
    for (const auto& v : vectors) {
      bool zero = true;
      for (std::size_t r = 0; r < n && zero; ++r) {
        Element acc = 0;
        for (std::size_t col = 0; col < n; ++col) acc = g.add(acc, g.scale(v[col], c[r][col]));
        zero = acc == 0;
      }
      if (zero) total += prob;
    }
  } while (next_digits(pick, law.a_pmf.size()));
  return total;
}

// Sequences in Sg(G)^k with w = 0, t = i, counted one by one.
mpz_class w0_sequences_by_enumeration(const SubgroupLattice& lattice, std::size_t k, int i) {
  std::vector<std::size_t> h(k, 0);
  mpz_class count = 0;
  do {
    int w = 0, t = 0;
    std::size_t prev = lattice.trivial_index();
    for (std::size_t j = 0; j < k; ++j) {
      const bool inside = lattice.contains(prev, h[j]);
      if (inside && prev != h[j]) ++t;
      if (j >= 1 && !inside) ++w;
      prev = h[j];
    }
    count += (w == 0 && t == i);
  } while (next_digits(h, lattice.size()));
  return count;
}

Subgroup subgroup_of(const AbelianPGroup& g, std::vector<Element> gens) { return generated_subgroup(g, gens); }

}  // namespace

TEST_CASE("moment identity examples") {
  const AbelianPGroup z2(2, Partition{1});
  const auto a = verify_moment_identity(FiniteSupportMatrixLaw::iid(1, 1, uniform_pmf(0, 1)), z2);
  CHECK(a.lhs == mpq_class(3, 2));
  CHECK(a.rhs == mpq_class(3, 2));
  CHECK(a.equal);
  const auto b = verify_moment_identity(FiniteSupportMatrixLaw::iid(1, 1, {{1, mpq_class(1)}}), z2);
  CHECK(b.lhs == 1);
  CHECK(b.equal);
  const auto c = verify_moment_identity(FiniteSupportMatrixLaw::iid(2, 2, uniform_pmf(0, 2)), AbelianPGroup(3, Partition{1}));
  CHECK(c.equal);
  CHECK_THROWS_AS(verify_moment_identity(FiniteSupportMatrixLaw::iid(3, 3, uniform_pmf(0, 1)), z2), GuardError);
  CHECK_THROWS_AS(FiniteSupportMatrixLaw::iid(1, 1, {{0, mpq_class(1, 2)}}), DomainError);
}

TEST_CASE("moment identity on random finite laws") {
  const std::vector<AbelianPGroup> groups = {AbelianPGroup(2, Partition{1}), AbelianPGroup(2, Partition{2}),
                                             AbelianPGroup(3, Partition{1}), AbelianPGroup(2, Partition{1, 1})};
  for (std::uint64_t t = 0; t < 40; ++t) {
    TrialRng rng(41, t, Stream::kAuxiliary);
    const std::size_t n = 1 + rng.bounded(2);
    FiniteSupportMatrixLaw law;
    law.rows = law.cols = n;
    for (std::size_t e = 0; e < n * n; ++e) {
      Pmf pmf;
      const std::size_t support = 1 + rng.bounded(3);
      unsigned long total = 0;
      std::vector<unsigned long> w(support);
      for (auto& x : w) total += (x = 1 + rng.bounded(5));
      for (std::size_t s = 0; s < support; ++s) {
        mpq_class q(w[s], total);
        q.canonicalize();
        pmf.emplace_back(static_cast<std::int64_t>(rng.bounded(9)) - 4 + 10 * static_cast<std::int64_t>(s), q);
      }
      law.entries.push_back(pmf);
    }
    for (const auto& g : groups) CHECK(verify_moment_identity(law, g).equal);
  }
}

TEST_CASE("balanced sums") {
  const AbelianPGroup z2(2, Partition{1});
  const auto uniform8 = verify_balanced_sums(FiniteSupportMatrixLaw::iid(8, 8, uniform_pmf(0, 1)), z2);
  CHECK(uniform8.s_min == mpq_class(255, 256));
  CHECK(uniform8.s_max == mpq_class(255, 256));

  // n = 1: the only generating vector is g = (1), and Mg = M
  const Pmf bern = {{0, mpq_class(7, 10)}, {1, mpq_class(3, 10)}};
  const auto one = verify_balanced_sums(FiniteSupportMatrixLaw::iid(1, 1, bern), z2);
  CHECK(one.s_min == mpq_class(3, 10));
  CHECK(one.s_max == mpq_class(7, 10));

  // closed form for iid Bernoulli(q) rows over Z/2: a vector with j nonzero
  // coordinates hits each value with probability (1 +- (1 - 2q)^j) / 2
  for (std::size_t n : {2, 3, 5}) {
    const auto s = verify_balanced_sums(FiniteSupportMatrixLaw::iid(n, n, bern), z2);
    mpq_class expect_max = 0, expect_min = 0;
    for (std::size_t j = 1; j <= n; ++j) {
      mpq_class bias = 1;
      for (std::size_t e = 0; e < j; ++e) bias *= mpq_class(2, 5);
      mpq_class hi = 1, lo = 1;
      for (std::size_t r = 0; r < n; ++r) {
        hi *= (1 + bias) / 2;
        lo *= (1 - bias) / 2;
      }
      expect_max += mpq_class(binomial(n, j)) * hi;
      expect_min += mpq_class(binomial(n, j)) * lo;
    }
    CHECK(s.s_max == expect_max);
    CHECK(s.s_min == expect_min);
    CHECK(s.s_min <= s.s_max);
  }

  // rows with different laws take the general path
  FiniteSupportMatrixLaw mixed = FiniteSupportMatrixLaw::iid(2, 2, uniform_pmf(0, 1));
  mixed.entries[2] = bern;
  const auto m = verify_balanced_sums(mixed, z2);
  CHECK(m.s_min <= m.s_max);
  CHECK(m.s_max <= 3);
}

TEST_CASE("residual bound") {
  const AbelianPGroup z2(2, Partition{1});
  const Pmf uniform01 = uniform_pmf(0, 1);
  const std::vector<Pmf> row1 = {uniform01};
  const std::vector<Element> one = {1};
  const auto trivial = subgroup_of(z2, {});
  const auto a = verify_residual_bound(row1, z2, trivial, one, 3);
  CHECK(a.probability == mpq_class(1, 8));
  CHECK(a.bound == mpq_class(1, 8));
  CHECK(a.holds);
  const auto empty = verify_residual_bound(row1, z2, trivial, one, 0);
  CHECK(empty.probability == 1);
  CHECK(empty.bound == 1);

  const AbelianPGroup z4(2, Partition{2});
  const std::vector<Pmf> row4 = {uniform_pmf(0, 3)};
  const auto c = verify_residual_bound(row4, z4, subgroup_of(z4, {2}), one, 2);
  CHECK(c.epsilon == mpq_class(1, 2));
  CHECK(c.probability == mpq_class(1, 4));
  CHECK(c.bound == mpq_class(1, 4));
  CHECK(c.holds);

  const std::vector<Element> two = {2};
  CHECK_THROWS_AS(verify_residual_bound(row4, z4, subgroup_of(z4, {2}), two, 2), DomainError);

  // shifted targets and longer rows
  const AbelianPGroup v(2, Partition{1, 1});
  const std::vector<Pmf> row3 = {uniform_pmf(0, 2), uniform_pmf(-1, 1), {{1, mpq_class(1, 3)}, {2, mpq_class(2, 3)}}};
  const auto g0 = subgroup_of(v, {1});
  for (Element x = 0; x < 4; ++x)
    for (Element y = 0; y < 4; ++y)
      for (Element z = 0; z < 4; ++z) {
        const std::vector<Element> vec = {x, y, z};
        if (g0.contains(x) && g0.contains(y) && g0.contains(z)) continue;
        const std::vector<Element> f = {3, 0, 1};
        CHECK(verify_residual_bound(row3, v, g0, vec, 3, f).holds);
      }
}

TEST_CASE("cokernel identity for the bidiagonal embedding") {
  CHECK(verify_cok_identity({IntMatrix{{2}}, IntMatrix{{3}}}));
  CHECK(cokernel_invariants(IntMatrix{{6}}) == std::vector<mpz_class>{6});
  const auto id = IntMatrix::identity(2);
  CHECK(verify_cok_identity({id, id}));
  CHECK(cokernel_invariants(build_bidiagonal_embedding(std::span<const IntMatrix>(std::vector<IntMatrix>{id, id}))).empty());
  CHECK(cokernel_invariants(IntMatrix{{0, 0}, {0, 2}}) == std::vector<mpz_class>{0, 2});
  for (std::uint64_t t = 0; t < 100; ++t) {
    TrialRng rng(42, t, Stream::kAuxiliary);
    const std::size_t n = 1 + rng.bounded(3), k = 1 + rng.bounded(4);
    std::vector<IntMatrix> factors;
    for (std::size_t i = 0; i < k; ++i) {
      IntMatrix m(n, n);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) m(r, c) = static_cast<long>(rng.bounded(11)) - 5;
      factors.push_back(m);
    }
    CHECK(verify_cok_identity(factors));
  }
  CHECK_THROWS_AS(verify_cok_identity(std::vector<IntMatrix>(5, IntMatrix::identity(5))), GuardError);
}

TEST_CASE("w and t statistics") {
  const AbelianPGroup z2(2, Partition{1});
  const auto l2 = enumerate_subgroups(z2);
  const std::vector<std::size_t> sizes = {2, 2};
  const std::vector<Element> zero = {0, 0, 0, 0};
  const auto z = wt_statistics(l2, zero, sizes);
  CHECK(z.w == 0);
  CHECK(z.t == 0);
  const std::vector<Element> drop = {1, 0, 0, 0};
  const auto d = wt_statistics(l2, drop, sizes);
  CHECK(d.w == 1);
  CHECK(d.t == 1);
  CHECK(d.tyg == std::vector<std::size_t>{l2.full_index(), l2.trivial_index()});

  const AbelianPGroup z4(2, Partition{2});
  const auto l4 = enumerate_subgroups(z4);
  const std::vector<Element> climb = {0, 2, 1};
  const std::vector<std::size_t> ones = {1, 1, 1};
  const auto c = wt_statistics(l4, climb, ones);
  CHECK(c.w == 0);
  CHECK(c.t == 2);
  CHECK_THROWS_AS(wt_statistics(l4, climb, sizes), StructuralError);
}

TEST_CASE("chain claim") {
  const AbelianPGroup g(2, Partition{2, 1});
  const auto lattice = enumerate_subgroups(g);
  const std::vector<std::size_t> constant(5, lattice.full_index());
  CHECK(verify_chain_claim(lattice, constant));

  const AbelianPGroup cyclic(3, Partition{4});
  const auto cl = enumerate_subgroups(cyclic);
  std::vector<std::size_t> chain;
  for (std::size_t i = 1; i < cl.size(); ++i) chain.push_back(i);  // ordered by size
  const auto st = wt_of_sequence(cl, chain);
  CHECK(st.t == 4);
  CHECK(st.w == 0);
  CHECK(verify_chain_claim(cl, chain));

  for (std::uint64_t t = 0; t < 2000; ++t) {
    TrialRng rng(43, t, Stream::kAuxiliary);
    std::vector<std::size_t> h(10);
    for (auto& x : h) x = rng.bounded(lattice.size());
    CHECK(verify_chain_claim(lattice, h));
  }
}

TEST_CASE("generates agrees with the generated subgroup") {
  for (const auto& g : {AbelianPGroup(2, Partition{2, 1}), AbelianPGroup(3, Partition{1, 1}), AbelianPGroup(2, Partition{1, 1, 1})}) {
    const std::size_t order = g.element_count();
    for (Element a = 0; a < order; ++a)
      for (Element b = 0; b < order; ++b) {
        const std::vector<Element> gens = {a, b};
        CHECK(generates(g, gens) == (generated_subgroup(g, gens).order() == order));
      }
  }
}

TEST_CASE("w = 0 sequence counts") {
  const AbelianPGroup z2(2, Partition{1});
  CHECK(count_w0_sequences(enumerate_subgroups(z2), 3, 1) == 3);
  for (const auto& g : {AbelianPGroup(2, Partition{1}), AbelianPGroup(2, Partition{1, 1}), AbelianPGroup(2, Partition{2, 1}),
                        AbelianPGroup(3, Partition{1, 1}), AbelianPGroup(2, Partition{3})}) {
    const auto lattice = enumerate_subgroups(g);
    for (std::size_t k = 1; k <= 4; ++k) {
      std::uint64_t total = 1;
      for (std::size_t j = 0; j < k; ++j) total *= lattice.size();
      if (total > 200000) continue;
      for (int i = 0; i <= ell(g) + 1; ++i) {
        const auto dp = count_w0_sequences(lattice, k, i);
        CHECK(dp == w0_sequences_by_enumeration(lattice, k, i));
        CHECK(dp == chain_count(lattice, i) * binomial(k, static_cast<std::size_t>(i)));
      }
    }
  }
}

TEST_CASE("w = 0 decomposition") {
  const AbelianPGroup z2(2, Partition{1});
  TinyBlockLaw law{{1, 1}, uniform_pmf(0, 1), IntMatrix()};
  const auto r = verify_w0_decomposition(law, z2, 1);
  CHECK(r.target == 2);
  CHECK(r.sum == w0_sum_by_matrices(law, z2, 1));
  CHECK(r.sequence_count == 2);

  const auto zero = verify_w0_decomposition(law, z2, 0);
  CHECK(zero.target == 1);
  CHECK(zero.sum == 1);  // g = 0 only

  const std::vector<std::pair<TinyBlockLaw, AbelianPGroup>> cases = {
      {{{1, 1, 1}, uniform_pmf(0, 1), IntMatrix()}, AbelianPGroup(2, Partition{2})},
      {{{1, 1, 1}, uniform_pmf(0, 2), IntMatrix{{0, 0, 0}, {0, 0, 0}, {2, 0, 0}}}, AbelianPGroup(3, Partition{1})},
      {{{2, 1}, uniform_pmf(0, 1), IntMatrix()}, AbelianPGroup(2, Partition{1})},
      {{{1, 1, 1}, {{0, mpq_class(1, 4)}, {1, mpq_class(3, 4)}}, IntMatrix{{0, 0, 0}, {0, 0, 0}, {1, 0, 0}}},
       AbelianPGroup(2, Partition{1, 1})},
  };
  for (const auto& [tiny, g] : cases)
    for (int i = 0; i <= ell(g); ++i) {
      const auto d = verify_w0_decomposition(tiny, g, i);
      CHECK(d.sum == w0_sum_by_matrices(tiny, g, i));
    }

  TinyBlockLaw bad{{1, 1}, uniform_pmf(0, 1), IntMatrix{{0, 1}, {0, 0}}};
  CHECK_THROWS_AS(verify_w0_decomposition(bad, z2, 1), StructuralError);
}

TEST_CASE("verify suites") {
  for (const std::string name : {"identity", "cok", "chains", "decomposition"}) {
    std::ostringstream out;
    const auto results = run_verify_suite(name, out, 1);
    REQUIRE(results.size() == 1);
    CHECK_MESSAGE(results[0].ok(), out.str());
    CHECK(results[0].total > 0);
  }
  std::ostringstream out;
  CHECK_THROWS_AS(run_verify_suite("nope", out), ConfigError);
}
