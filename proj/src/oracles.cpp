#include "cokfluct/oracles.hpp"

#include <algorithm>
#include <numeric>

#include "cokfluct/ensembles.hpp"
#include "cokfluct/errors.hpp"

namespace cokfluct {

using Element = AbelianPGroup::Element;

namespace {

// Advances a mixed-radix counter; false once it wraps to zero.
bool next_digits(std::vector<std::size_t>& digits, std::span<const std::size_t> radix) {
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (++digits[i] < radix[i]) return true;
    digits[i] = 0;
  }
  return false;
}

// Saturating product, used only for guards.
std::uint64_t guarded_power(std::uint64_t base, std::size_t e, std::uint64_t limit) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < e; ++i) {
    if (base != 0 && out > limit / base) return limit + 1;
    out *= base;
  }
  return out;
}

mpq_class residue_max_mass(const Pmf& pmf, std::uint64_t p) {
  std::vector<mpq_class> mass(p, 0);
  const auto m = static_cast<std::int64_t>(p);
  for (const auto& [v, w] : pmf) mass[static_cast<std::size_t>(((v % m) + m) % m)] += w;
  return *std::max_element(mass.begin(), mass.end());
}

}  // namespace

FiniteSupportMatrixLaw FiniteSupportMatrixLaw::iid(std::size_t rows, std::size_t cols, const Pmf& pmf) {
  FiniteSupportMatrixLaw law;
  law.rows = rows;
  law.cols = cols;
  law.entries.assign(rows * cols, pmf);
  law.validate();
  return law;
}

void FiniteSupportMatrixLaw::validate() const {
  if (entries.size() != rows * cols) throw DomainError("law has the wrong number of entries");
  for (const auto& pmf : entries) {
    if (pmf.empty()) throw DomainError("entry law with empty support");
    mpq_class total = 0;
    for (const auto& [v, w] : pmf) {
      if (w <= 0) throw DomainError("entry law with a non-positive probability");
      total += w;
    }
    if (total != 1) throw DomainError("entry law sums to " + total.get_str() + ", not 1");
  }
}

Pmf uniform_pmf(std::int64_t a, std::int64_t b) {
  Pmf out;
  const mpq_class w(1, static_cast<unsigned long>(b - a + 1));
  for (std::int64_t v = a; v <= b; ++v) out.emplace_back(v, w);
  return out;
}

std::vector<mpq_class> linear_form_pmf(const AbelianPGroup& g, std::span<const Pmf> pmfs,
                                       std::span<const Element> coeffs, Element shift) {
  const std::size_t order = g.element_count();
  std::vector<mpq_class> dist(order, 0), next(order), push(order);
  dist[shift] = 1;
  for (std::size_t c = 0; c < pmfs.size(); ++c) {
    if (coeffs[c] == 0) continue;  // x * 0 = 0 whatever x is
    std::fill(push.begin(), push.end(), 0);
    for (const auto& [v, w] : pmfs[c]) push[g.scale(coeffs[c], v)] += w;
    std::fill(next.begin(), next.end(), 0);
    for (std::size_t a = 0; a < order; ++a) {
      if (dist[a] == 0) continue;
      for (std::size_t b = 0; b < order; ++b)
        if (push[b] != 0) next[g.add(static_cast<Element>(a), static_cast<Element>(b))] += dist[a] * push[b];
    }
    std::swap(dist, next);
  }
  return dist;
}

bool generates(const AbelianPGroup& g, std::span<const Element> elements) {
  const std::size_t r = g.rank();
  const auto p = g.prime();
  // rows: images in G / pG = F_p^r
  std::vector<std::vector<std::uint64_t>> rows;
  for (auto x : elements) {
    auto d = g.digits(x);
    for (auto& v : d) v %= p;
    rows.push_back(std::move(d));
  }
  std::size_t rank = 0;
  for (std::size_t c = 0; c < r && rank < rows.size(); ++c) {
    std::size_t piv = rank;
    while (piv < rows.size() && rows[piv][c] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[rank], rows[piv]);
    // inverse by Fermat
    std::uint64_t inv = 1, base = rows[rank][c], e = p - 2;
    while (e) {
      if (e & 1) inv = inv * base % p;
      base = base * base % p;
      e >>= 1;
    }
    for (std::size_t x = rank + 1; x < rows.size(); ++x) {
      const std::uint64_t f = rows[x][c] * inv % p;
      if (f == 0) continue;
      for (std::size_t cc = c; cc < r; ++cc) rows[x][cc] = (rows[x][cc] + (p - f) * rows[rank][cc]) % p;
    }
    ++rank;
  }
  return rank == r;
}

IdentityCheck verify_moment_identity(const FiniteSupportMatrixLaw& law, const AbelianPGroup& g) {
  law.validate();
  if (law.rows != law.cols) throw StructuralError("moment identity needs a square law");
  const std::size_t n = law.cols;
  if (n > 2) throw GuardError("moment identity enumeration is limited to n <= 2");

  std::vector<std::size_t> radix;
  std::uint64_t matrices = 1;
  for (const auto& pmf : law.entries) {
    radix.push_back(pmf.size());
    matrices *= pmf.size();
  }
  if (matrices > 1'000'000) throw GuardError("more than 10^6 matrices in the support");
  const std::size_t order = g.element_count();
  if (guarded_power(order, n, 1'000'000) > 1'000'000) throw GuardError("|G|^n exceeds 10^6");

  IdentityCheck out;
  std::vector<std::size_t> pick(law.entries.size(), 0), gv_radix(n, order), gv(n, 0);
  IntMatrix m(n, n);
  do {
    mpq_class prob = 1;
    for (std::size_t e = 0; e < pick.size(); ++e) {
      const auto& [v, w] = law.entries[e][pick[e]];
      m(e / n, e % n) = static_cast<long>(v);
      prob *= w;
    }
    // |Hom(cok M, G)| through the cokernel type
    const SylowType type = cokernel_partition(m, g.prime());
    mpz_class free_part;
    mpz_pow_ui(free_part.get_mpz_t(), g.order().get_mpz_t(), static_cast<unsigned long>(type.free_rank));
    out.lhs += prob * mpq_class(hom_count(type.partition, g.lambda(), g.prime()) * free_part);

    // #{g in G^n : M g = 0} by direct enumeration
    std::uint64_t solutions = 0;
    std::fill(gv.begin(), gv.end(), 0);
    do {
      bool zero = true;
      for (std::size_t r = 0; r < n && zero; ++r) {
        Element acc = 0;
        for (std::size_t c = 0; c < n; ++c)
          acc = g.add(acc, g.scale(static_cast<Element>(gv[c]), law.entries[r * n + c][pick[r * n + c]].first));
        zero = acc == 0;
      }
      solutions += zero;
    } while (next_digits(gv, gv_radix));
    out.rhs += prob * mpq_class(mpz_class(static_cast<unsigned long>(solutions)));
  } while (next_digits(pick, radix));
  out.equal = out.lhs == out.rhs;
  return out;
}

BalancedSums verify_balanced_sums(const FiniteSupportMatrixLaw& law, const AbelianPGroup& g0) {
  law.validate();
  const std::size_t n = law.cols;
  const std::size_t order = g0.element_count();
  if (guarded_power(order, n, 10'000'000) > 10'000'000) throw GuardError("|G0|^n exceeds 10^7");

  bool identical_rows = true;
  for (std::size_t r = 1; r < law.rows && identical_rows; ++r)
    identical_rows = std::equal(law.entries.begin() + static_cast<std::ptrdiff_t>(r * n),
                                law.entries.begin() + static_cast<std::ptrdiff_t>((r + 1) * n), law.entries.begin());

  BalancedSums out;
  std::vector<std::size_t> gv(n, 0), radix(n, order);
  std::vector<Element> vec(n);
  do {
    for (std::size_t c = 0; c < n; ++c) vec[c] = static_cast<Element>(gv[c]);
    if (!generates(g0, vec)) continue;
    mpq_class lo = 1, hi = 1;
    for (std::size_t r = 0; r < law.rows; ++r) {
      const std::span<const Pmf> row(law.entries.data() + r * n, n);
      const auto dist = linear_form_pmf(g0, row, vec);
      const mpq_class& row_lo = *std::min_element(dist.begin(), dist.end());
      const mpq_class& row_hi = *std::max_element(dist.begin(), dist.end());
      if (identical_rows) {
        // every row has the same marginal
        mpz_class lo_num, lo_den, hi_num, hi_den;
        const auto e = static_cast<unsigned long>(law.rows);
        mpz_pow_ui(lo_num.get_mpz_t(), row_lo.get_num_mpz_t(), e);
        mpz_pow_ui(lo_den.get_mpz_t(), row_lo.get_den_mpz_t(), e);
        mpz_pow_ui(hi_num.get_mpz_t(), row_hi.get_num_mpz_t(), e);
        mpz_pow_ui(hi_den.get_mpz_t(), row_hi.get_den_mpz_t(), e);
        lo = mpq_class(lo_num, lo_den);
        hi = mpq_class(hi_num, hi_den);
        lo.canonicalize();
        hi.canonicalize();
        break;
      }
      lo *= row_lo;
      hi *= row_hi;
    }
    out.s_min += lo;
    out.s_max += hi;
  } while (next_digits(gv, radix));
  return out;
}

ResidualBound verify_residual_bound(std::span<const Pmf> row_law, const AbelianPGroup& g, const Subgroup& g0,
                                    std::span<const Element> vec, std::size_t m, std::span<const Element> f) {
  if (vec.size() != row_law.size()) throw StructuralError("vector length differs from the row length");
  if (!f.empty() && f.size() != m) throw StructuralError("shift length differs from m");
  if (std::all_of(vec.begin(), vec.end(), [&](Element x) { return g0.contains(x); }))
    throw DomainError("the subgroup generated by g lies inside G0");

  ResidualBound out;
  mpq_class max_mass = 0;
  for (const auto& pmf : row_law) max_mass = std::max(max_mass, residue_max_mass(pmf, g.prime()));
  out.epsilon = 1 - max_mass;
  out.probability = 1;
  out.bound = 1;
  for (std::size_t r = 0; r < m; ++r) {
    const auto dist = linear_form_pmf(g, row_law, vec, f.empty() ? 0 : f[r]);
    mpq_class inside = 0;
    for (auto x : g0.elements) inside += dist[x];
    out.probability *= inside;
    out.bound *= 1 - out.epsilon;
  }
  out.holds = out.probability <= out.bound;
  return out;
}

std::vector<mpz_class> cokernel_invariants(const IntMatrix& m) {
  std::vector<mpz_class> out;
  for (const auto& d : snf_diagonal(m))
    if (d != 1) out.push_back(d);
  for (std::size_t i = std::min(m.rows(), m.cols()); i < m.cols(); ++i) out.push_back(0);
  std::sort(out.begin(), out.end());
  return out;
}

bool verify_cok_identity(const std::vector<IntMatrix>& factors) {
  if (factors.empty()) throw StructuralError("no factors");
  const std::size_t n = factors.front().rows();
  if (n * factors.size() > 24) throw GuardError("n * k exceeds 24");
  IntMatrix product = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) product = product * factors[i];
  const IntMatrix embedded = build_bidiagonal_embedding(std::span<const IntMatrix>(factors));
  return cokernel_invariants(embedded) == cokernel_invariants(product);
}

WtStatistics wt_of_sequence(const SubgroupLattice& lattice, std::span<const std::size_t> h) {
  WtStatistics out;
  std::size_t prev = lattice.trivial_index();
  for (std::size_t i = 0; i < h.size(); ++i) {
    const std::size_t cur = h[i];
    const bool inside = lattice.contains(prev, cur);
    if (inside && prev != cur) ++out.t;
    if (i >= 1 && !inside) ++out.w;
    out.tyg.push_back(cur);
    prev = cur;
  }
  return out;
}

WtStatistics wt_statistics(const SubgroupLattice& lattice, std::span<const Element> g,
                           std::span<const std::size_t> block_sizes) {
  if (std::accumulate(block_sizes.begin(), block_sizes.end(), std::size_t{0}) != g.size())
    throw StructuralError("block sizes do not add up to the vector length");
  std::vector<std::size_t> h;
  std::size_t offset = 0;
  for (auto s : block_sizes) {
    h.push_back(lattice.index_of_generated(g.subspan(offset, s)));
    offset += s;
  }
  return wt_of_sequence(lattice, h);
}

bool verify_chain_claim(const SubgroupLattice& lattice, std::span<const std::size_t> h) {
  const auto s = wt_of_sequence(lattice, h);
  return s.t <= ell(lattice.group()) * (1 + s.w);
}

mpz_class count_w0_sequences(const SubgroupLattice& lattice, std::size_t k, int i) {
  if (i < 0) return 0;
  const std::size_t s = lattice.size();
  std::vector<std::vector<std::size_t>> above(s);
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = 0; b < s; ++b)
      if (lattice.contains(a, b)) above[a].push_back(b);

  const auto width = static_cast<std::size_t>(i) + 1;
  // ways[h][t]: sequences so far ending at subgroup h with t strict steps
  std::vector<std::vector<mpz_class>> ways(s, std::vector<mpz_class>(width, 0)), next = ways;
  ways[lattice.trivial_index()][0] = 1;
  for (std::size_t step = 0; step < k; ++step) {
    for (auto& row : next) std::fill(row.begin(), row.end(), 0);
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t t = 0; t < width; ++t) {
        if (ways[a][t] == 0) continue;
        for (auto b : above[a]) {
          const std::size_t nt = t + (b != a);
          if (nt < width) next[b][nt] += ways[a][t];
        }
      }
    std::swap(ways, next);
  }
  mpz_class total = 0;
  for (std::size_t a = 0; a < s; ++a) total += ways[a][width - 1];
  return total;
}

mpz_class binomial(std::size_t n, std::size_t k) {
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return out;
}

W0Decomposition verify_w0_decomposition(const TinyBlockLaw& law, const AbelianPGroup& g, int i) {
  const auto& sizes = law.block_sizes;
  const std::size_t k = sizes.size();
  if (k == 0) throw StructuralError("no blocks");
  const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  const std::size_t order = g.element_count();
  if (guarded_power(order, n, 1'000'000) > 1'000'000) throw GuardError("|G|^n exceeds 10^6");

  std::vector<std::size_t> offset(k + 1, 0);
  for (std::size_t b = 0; b < k; ++b) offset[b + 1] = offset[b] + sizes[b];
  const bool has_b = law.b_fixed.rows() != 0;
  if (has_b) {
    if (law.b_fixed.rows() != n || law.b_fixed.cols() != n) throw StructuralError("B' has the wrong shape");
    for (const auto& x : law.b_fixed.entries())
      if (!x.fits_slong_p()) throw StructuralError("B' entries must fit in a machine word");
    for (std::size_t br = 0; br < k; ++br)
      for (std::size_t r = offset[br]; r < offset[br + 1]; ++r)
        for (std::size_t c = (br >= 1 ? offset[br - 1] : 0); c < n; ++c)
          if (law.b_fixed(r, c) != 0) throw StructuralError("B' must vanish on and above the subdiagonal blocks");
  }

  const SubgroupLattice lattice = enumerate_subgroups(g);
  W0Decomposition out;
  if (i >= 0 && static_cast<std::size_t>(i) <= k)
    out.target = mpq_class(chain_count(lattice, i) * binomial(k, static_cast<std::size_t>(i)));
  out.sequence_count = count_w0_sequences(lattice, k, i);

  std::vector<std::size_t> gv(n, 0), radix(n, order);
  std::vector<Element> vec(n), coeffs;
  std::vector<Pmf> pmfs;
  do {
    for (std::size_t c = 0; c < n; ++c) vec[c] = static_cast<Element>(gv[c]);
    const auto st = wt_statistics(lattice, vec, sizes);
    if (st.w != 0 || st.t != i) continue;
    ++out.vector_count;
    // P(Cg = 0) = product over rows of P(row . g = 0)
    mpq_class prob = 1;
    for (std::size_t br = 0; br < k && prob != 0; ++br) {
      const std::size_t c0 = br >= 1 ? offset[br - 1] : offset[br];
      const std::size_t c1 = offset[br + 1];
      coeffs.assign(vec.begin() + static_cast<std::ptrdiff_t>(c0), vec.begin() + static_cast<std::ptrdiff_t>(c1));
      pmfs.assign(c1 - c0, law.a_pmf);
      for (std::size_t r = offset[br]; r < offset[br + 1]; ++r) {
        Element shift = 0;
        if (has_b)
          for (std::size_t c = 0; c < c0; ++c)
            shift = g.add(shift, g.scale(vec[c], law.b_fixed(r, c).get_si()));
        prob *= linear_form_pmf(g, pmfs, coeffs, shift)[0];
      }
    }
    out.sum += prob;
  } while (next_digits(gv, radix));
  return out;
}

}  // namespace cokfluct
