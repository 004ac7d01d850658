#include <algorithm>
#include <cstdio>
#include <functional>
#include <ostream>

#include "cokfluct/errors.hpp"
#include "cokfluct/oracles.hpp"
#include "cokfluct/rng.hpp"

namespace cokfluct {

namespace {

using Element = AbelianPGroup::Element;

class Suite {
 public:
  Suite(std::string name, std::ostream& out) : out_(out) { result_.name = std::move(name); }

  void check(bool ok, const std::string& what) {
    ++result_.total;
    result_.passed += ok;
    out_ << (ok ? "PASS  " : "FAIL  ") << what << "\n";
  }

  void note(const std::string& what) { out_ << "INFO  " << what << "\n"; }

  SuiteResult finish() {
    out_ << "----  " << result_.name << ": " << result_.passed << "/" << result_.total << " passed\n";
    return result_;
  }

 private:
  std::ostream& out_;
  SuiteResult result_;
};

AbelianPGroup group(std::uint64_t p, std::vector<int> parts) { return AbelianPGroup(p, Partition(std::move(parts))); }

std::string group_name(const AbelianPGroup& g) {
  if (g.lambda().empty()) return "0";
  std::string out;
  for (int e : g.lambda().parts()) {
    if (!out.empty()) out += "+";
    std::uint64_t q = 1;
    for (int i = 0; i < e; ++i) q *= g.prime();
    out += "Z/" + std::to_string(q);
  }
  return out;
}

Pmf weighted(std::vector<std::pair<std::int64_t, mpq_class>> w) { return w; }

SuiteResult identity_suite(std::ostream& out) {
  Suite s("identity: E|Hom(cok M, G)| = sum over g in G^n of P(Mg = 0)", out);
  const std::vector<std::pair<std::string, Pmf>> laws = {
      {"uniform{0,1}", uniform_pmf(0, 1)},
      {"uniform{0,1,2}", uniform_pmf(0, 2)},
      {"{-1:1/4, 0:1/2, 1:1/4}", weighted({{-1, mpq_class(1, 4)}, {0, mpq_class(1, 2)}, {1, mpq_class(1, 4)}})},
      {"{0:1/3, 2:1/2, 3:1/6}", weighted({{0, mpq_class(1, 3)}, {2, mpq_class(1, 2)}, {3, mpq_class(1, 6)}})},
      {"constant 1", weighted({{1, mpq_class(1)}})},
  };
  const std::vector<AbelianPGroup> groups = {group(2, {1}), group(3, {1}), group(2, {1, 1}), group(2, {2})};

  for (const auto& g : groups)
    for (std::size_t n = 1; n <= 2; ++n)
      for (const auto& [name, pmf] : laws) {
        const auto r = verify_moment_identity(FiniteSupportMatrixLaw::iid(n, n, pmf), g);
        s.check(r.equal, "G=" + group_name(g) + " n=" + std::to_string(n) + " entries " + name + ": " +
                             r.lhs.get_str() + " = " + r.rhs.get_str());
      }

  // entries with different laws
  FiniteSupportMatrixLaw mixed;
  mixed.rows = mixed.cols = 2;
  mixed.entries = {uniform_pmf(0, 1), uniform_pmf(-1, 1), weighted({{2, mpq_class(1)}}), uniform_pmf(0, 3)};
  for (const auto& g : groups) {
    const auto r = verify_moment_identity(mixed, g);
    s.check(r.equal, "G=" + group_name(g) + " n=2 non-identical entries: " + r.lhs.get_str() + " = " + r.rhs.get_str());
  }
  return s.finish();
}

SuiteResult balanced_suite(std::ostream& out) {
  Suite s("balanced: sums over generating vectors and the residual bound", out);
  const auto z2 = group(2, {1});

  {
    const auto r = verify_balanced_sums(FiniteSupportMatrixLaw::iid(8, 8, uniform_pmf(0, 1)), z2);
    const mpq_class expect = 1 - mpq_class(1, 256);
    s.check(r.s_min == expect && r.s_max == expect,
            "G0=Z/2 n=8 uniform{0,1}: S_min = S_max = 1 - 2^-8 (got " + r.s_min.get_str() + ", " + r.s_max.get_str() + ")");
  }
  {
    const auto z3 = group(3, {1});
    const auto r = verify_balanced_sums(FiniteSupportMatrixLaw::iid(4, 4, uniform_pmf(0, 2)), z3);
    const mpq_class expect = 1 - mpq_class(1, 81);
    s.check(r.s_min == expect && r.s_max == expect, "G0=Z/3 n=4 uniform{0,1,2}: S_min = S_max = 1 - 3^-4");
  }
  {
    const Pmf b = weighted({{0, mpq_class(7, 10)}, {1, mpq_class(3, 10)}});
    const auto r = verify_balanced_sums(FiniteSupportMatrixLaw::iid(1, 1, b), z2);
    s.check(r.s_min == mpq_class(3, 10) && r.s_max == mpq_class(7, 10), "G0=Z/2 n=1 Bernoulli(3/10): S = (3/10, 7/10)");
  }
  {
    // Small n is pre-asymptotic: |S_max - 1| first grows (n = 4, 6) before it
    // shrinks, so the monotone check runs on a grid past that hump.
    const Pmf b = weighted({{0, mpq_class(7, 10)}, {1, mpq_class(3, 10)}});
    std::string values;
    for (std::size_t n : {4, 6, 8}) {
      const auto r = verify_balanced_sums(FiniteSupportMatrixLaw::iid(n, n, b), z2);
      char buf[96];
      std::snprintf(buf, sizeof buf, " n=%zu: [%.6f, %.6f]", n, r.s_min.get_d(), r.s_max.get_d());
      values += buf;
    }
    s.note("G0=Z/2 Bernoulli(3/10) (S_min, S_max):" + values);

    mpq_class prev_max = 1000, prev_min = 1000;
    bool decreasing = true, ordered = true;
    values.clear();
    for (std::size_t n : {10, 12, 14, 16}) {
      const auto r = verify_balanced_sums(FiniteSupportMatrixLaw::iid(n, n, b), z2);
      const mpq_class dmax = abs(r.s_max - 1), dmin = abs(r.s_min - 1);
      decreasing = decreasing && dmax < prev_max && dmin < prev_min;
      ordered = ordered && r.s_min <= r.s_max;
      prev_max = dmax;
      prev_min = dmin;
      char buf[96];
      std::snprintf(buf, sizeof buf, " n=%zu: [%.6f, %.6f]", n, r.s_min.get_d(), r.s_max.get_d());
      values += buf;
    }
    s.check(decreasing && ordered,
            "G0=Z/2 Bernoulli(3/10): S_min <= S_max and |S - 1| strictly decreasing;" + values);
  }

  {
    const auto lattice = enumerate_subgroups(z2);
    const std::vector<Pmf> row = {uniform_pmf(0, 1)};
    const std::vector<Element> vec = {1};
    const auto r3 = verify_residual_bound(row, z2, lattice.subgroup(0), vec, 3);
    s.check(r3.holds && r3.probability == mpq_class(1, 8) && r3.bound == mpq_class(1, 8),
            "residual bound G=Z/2 G0=0 m=3: " + r3.probability.get_str() + " <= " + r3.bound.get_str());
    const auto r0 = verify_residual_bound(row, z2, lattice.subgroup(0), vec, 0);
    s.check(r0.holds && r0.probability == 1 && r0.bound == 1, "residual bound m=0: 1 <= 1");
  }
  {
    const auto z4 = group(2, {2});
    const auto lattice = enumerate_subgroups(z4);
    const Element two = z4.scale(1, 2);
    const std::vector<Element> gen2 = {two};
    const auto& g0 = lattice.subgroup(lattice.index_of_generated(gen2));
    const std::vector<Pmf> row = {uniform_pmf(0, 3)};
    const std::vector<Element> vec = {1};
    const auto r = verify_residual_bound(row, z4, g0, vec, 2);
    s.check(r.holds && r.probability == mpq_class(1, 4),
            "residual bound G=Z/4 G0=2Z/4 m=2 uniform{0..3}: " + r.probability.get_str() + " <= " + r.bound.get_str() +
                " (eps = " + r.epsilon.get_str() + ")");
    // random shifts and vectors over a non-uniform law
    TrialRng rng(7, 0, Stream::kAuxiliary);
    const std::vector<Pmf> law = {weighted({{0, mpq_class(1, 2)}, {1, mpq_class(1, 3)}, {3, mpq_class(1, 6)}}),
                                  uniform_pmf(-2, 1)};
    bool all = true;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Element> v(2);
      do {
        for (auto& x : v) x = static_cast<Element>(rng.bounded(4));
      } while (g0.contains(v[0]) && g0.contains(v[1]));
      std::vector<Element> f(3);
      for (auto& x : f) x = static_cast<Element>(rng.bounded(4));
      all = all && verify_residual_bound(law, z4, g0, v, 3, f).holds;
    }
    s.check(all, "residual bound G=Z/4 G0=2Z/4 m=3: 50 random (g, f) pairs");
  }
  return s.finish();
}

SuiteResult cok_suite(std::ostream& out, std::uint64_t seed) {
  Suite s("cok: bidiagonal embedding and product have isomorphic cokernels", out);
  s.check(verify_cok_identity({IntMatrix{{2}}, IntMatrix{{3}}}), "factors (2), (3): Z/6 both ways");
  s.check(verify_cok_identity({IntMatrix::identity(2), IntMatrix::identity(2)}), "factors I, I: trivial both ways");
  std::size_t passed = 0;
  const std::size_t total = 100;
  for (std::size_t t = 0; t < total; ++t) {
    TrialRng rng(seed, t, Stream::kAuxiliary);
    const std::size_t n = 1 + rng.bounded(3);
    const std::size_t k = 1 + rng.bounded(4);
    std::vector<IntMatrix> factors;
    for (std::size_t i = 0; i < k; ++i) {
      IntMatrix m(n, n);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) m(r, c) = static_cast<long>(rng.bounded(11)) - 5;
      factors.push_back(std::move(m));
    }
    passed += verify_cok_identity(factors);
  }
  s.check(passed == total, "random factors n<=3 k<=4 entries in [-5,5]: " + std::to_string(passed) + "/" +
                               std::to_string(total));
  return s.finish();
}

SuiteResult chains_suite(std::ostream& out, std::uint64_t seed) {
  Suite s("chains: t(H) <= l(G) (1 + w(H))", out);
  {
    const auto lattice = enumerate_subgroups(group(2, {1, 1}));
    const std::vector<std::size_t> h(5, lattice.full_index());
    const auto st = wt_of_sequence(lattice, h);
    s.check(verify_chain_claim(lattice, h) && st.t == 1 && st.w == 0, "constant sequence H_i = G: t=1, w=0");
  }
  {
    const auto lattice = enumerate_subgroups(group(3, {3}));
    // subgroups of a cyclic group are a chain; indices follow the order
    std::vector<std::size_t> h;
    for (std::size_t i = 1; i < lattice.size(); ++i) h.push_back(i);
    const auto st = wt_of_sequence(lattice, h);
    s.check(verify_chain_claim(lattice, h) && st.t == 3 && st.w == 0, "full chain in Z/27: t = l = 3, w = 0");
  }
  {
    const auto lattice = enumerate_subgroups(group(2, {2, 1}));
    std::size_t passed = 0;
    const std::size_t total = 10000;
    std::vector<std::size_t> h(10);
    for (std::size_t t = 0; t < total; ++t) {
      TrialRng rng(seed, t, Stream::kAuxiliary);
      for (auto& x : h) x = rng.bounded(lattice.size());
      passed += verify_chain_claim(lattice, h);
    }
    s.check(passed == total, "random sequences in Sg(Z/4+Z/2)^10: " + std::to_string(passed) + "/" +
                                 std::to_string(total));
  }
  return s.finish();
}

// Every abelian p-group of order at most `max_order`.
std::vector<AbelianPGroup> small_groups(std::uint64_t max_order) {
  std::vector<AbelianPGroup> out;
  for (std::uint64_t p = 2; p <= max_order; ++p) {
    bool prime = true;
    for (std::uint64_t d = 2; d * d <= p; ++d) prime = prime && p % d != 0;
    if (!prime) continue;
    std::uint64_t q = 1;
    for (int e = 0; q <= max_order; ++e, q *= p) {
      if (e == 0 && p != 2) continue;  // the trivial group once
      for (const auto& lambda : partitions_of(e)) out.emplace_back(p, lambda);
    }
  }
  return out;
}

SuiteResult decomposition_suite(std::ostream& out) {
  Suite s("decomposition: w=0 sequences and the factorized sum over them", out);
  {
    std::size_t passed = 0, total = 0;
    for (const auto& g : small_groups(16)) {
      const auto lattice = enumerate_subgroups(g);
      for (std::size_t k = 1; k <= 6; ++k)
        for (int i = 0; i <= static_cast<int>(k); ++i) {
          ++total;
          passed += count_w0_sequences(lattice, k, i) == chain_count(lattice, i) * binomial(k, static_cast<std::size_t>(i));
        }
    }
    s.check(passed == total, "#{H in Sg(G)^k : w=0, t=i} = c(G,i) C(k,i) for all |G| <= 16, k <= 6: " +
                                 std::to_string(passed) + "/" + std::to_string(total));
  }
  {
    const auto lattice = enumerate_subgroups(group(2, {1}));
    s.check(count_w0_sequences(lattice, 3, 1) == 3, "G=Z/2 k=3 i=1: 3 sequences");
  }
  {
    TinyBlockLaw law{{1, 1}, uniform_pmf(0, 1), IntMatrix()};
    const auto r = verify_w0_decomposition(law, group(2, {1}), 1);
    s.check(r.sum == mpq_class(3, 4) && r.target == 2,
            "G=Z/2 k=2 n_i=1 uniform{0,1} B'=0 i=1: sum " + r.sum.get_str() + ", target c(G,1) C(2,1) = " +
                r.target.get_str());
  }
  for (const auto& [parts, sizes] : std::vector<std::pair<std::vector<int>, std::vector<std::size_t>>>{
           {{1}, {1, 1, 1}}, {{1}, {2, 2, 2}}, {{2}, {1, 1, 1}}, {{1, 1}, {2, 1, 1}}}) {
    const auto g = group(2, parts);
    const std::size_t n = sizes[0] + sizes[1] + sizes[2];
    IntMatrix b(n, n);
    b(n - 1, 0) = 1;  // all-ones style B' on the one admissible block corner
    for (int i = 0; i <= 3; ++i) {
      TinyBlockLaw law{sizes, uniform_pmf(0, 3), b};
      const auto r = verify_w0_decomposition(law, g, i);
      char buf[64];
      std::snprintf(buf, sizeof buf, " ~ %.4f vs target %s", r.sum.get_d(), r.target.get_str().c_str());
      s.note("G=" + group_name(g) + " k=3 i=" + std::to_string(i) + ": sum over " + std::to_string(r.vector_count) +
             " vectors" + buf);
    }
  }
  return s.finish();
}

}  // namespace

std::vector<SuiteResult> run_verify_suite(const std::string& suite, std::ostream& out, std::uint64_t seed) {
  const std::vector<std::pair<std::string, std::function<SuiteResult()>>> table = {
      {"identity", [&] { return identity_suite(out); }},
      {"balanced", [&] { return balanced_suite(out); }},
      {"cok", [&] { return cok_suite(out, seed); }},
      {"chains", [&] { return chains_suite(out, seed); }},
      {"decomposition", [&] { return decomposition_suite(out); }},
  };
  std::vector<SuiteResult> results;
  for (const auto& [name, run] : table)
    if (suite == "all" || suite == name) results.push_back(run());
  if (results.empty())
    throw ConfigError("unknown verify suite '" + suite + "' (expected identity, balanced, cok, chains, decomposition or all)");
  return results;
}

}  // namespace cokfluct
