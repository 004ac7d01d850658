#include "cokfluct/pgroups.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "cokfluct/errors.hpp"

namespace cokfluct {

AbelianPGroup::AbelianPGroup(std::uint64_t p, Partition lambda) : p_(p), lambda_(std::move(lambda)) {
  if (p < 2) throw std::invalid_argument("group prime must be >= 2");
  for (std::uint64_t q = 2; q * q <= p; ++q)
    if (p % q == 0) throw std::invalid_argument("group order base " + std::to_string(p) + " is not prime");
  const std::size_t r = lambda_.length();
  moduli_.resize(r);
  weights_.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    std::uint64_t m = 1;
    for (int e = 0; e < lambda_.parts()[i]; ++e) {
      if (m > kMaxEnumerableOrder) {
        enumerable_ = false;
        break;
      }
      m *= p;
    }
    moduli_[i] = m;
  }
  for (std::size_t i = r; i-- > 0;) {
    weights_[i] = order_;
    if (!enumerable_ || order_ * moduli_[i] > kMaxEnumerableOrder) {
      enumerable_ = false;
    } else {
      order_ *= moduli_[i];
    }
  }
}

mpz_class AbelianPGroup::order() const {
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(p_), static_cast<unsigned long>(lambda_.size()));
  return out;
}

std::size_t AbelianPGroup::element_count() const {
  if (!enumerable_)
    throw GuardError("group " + lambda_.to_string() + " over p=" + std::to_string(p_) +
                     " exceeds the enumeration guard of 4096 elements");
  return static_cast<std::size_t>(order_);
}

std::vector<std::uint64_t> AbelianPGroup::digits(Element a) const {
  std::vector<std::uint64_t> d(moduli_.size());
  for (std::size_t i = 0; i < moduli_.size(); ++i) d[i] = (a / weights_[i]) % moduli_[i];
  return d;
}

AbelianPGroup::Element AbelianPGroup::from_digits(std::span<const std::int64_t> digits) const {
  if (digits.size() != moduli_.size()) throw std::invalid_argument("digit count differs from group rank");
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < moduli_.size(); ++i) {
    const auto m = static_cast<std::int64_t>(moduli_[i]);
    std::int64_t d = digits[i] % m;
    if (d < 0) d += m;
    out += static_cast<std::uint64_t>(d) * weights_[i];
  }
  return static_cast<Element>(out);
}

AbelianPGroup::Element AbelianPGroup::add(Element a, Element b) const {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < moduli_.size(); ++i) {
    const std::uint64_t da = (a / weights_[i]) % moduli_[i];
    const std::uint64_t db = (b / weights_[i]) % moduli_[i];
    out += ((da + db) % moduli_[i]) * weights_[i];
  }
  return static_cast<Element>(out);
}

AbelianPGroup::Element AbelianPGroup::neg(Element a) const {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < moduli_.size(); ++i) {
    const std::uint64_t da = (a / weights_[i]) % moduli_[i];
    out += ((moduli_[i] - da) % moduli_[i]) * weights_[i];
  }
  return static_cast<Element>(out);
}

AbelianPGroup::Element AbelianPGroup::scale(Element a, std::int64_t m) const {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < moduli_.size(); ++i) {
    const auto mod = static_cast<std::int64_t>(moduli_[i]);
    const auto da = static_cast<std::int64_t>((a / weights_[i]) % moduli_[i]);
    std::int64_t f = m % mod;
    if (f < 0) f += mod;
    out += static_cast<std::uint64_t>((da * f) % mod) * weights_[i];
  }
  return static_cast<Element>(out);
}

std::uint64_t AbelianPGroup::element_order(Element a) const {
  std::uint64_t ord = 1;
  Element x = a;
  while (x != 0) {
    x = add(x, a);
    ++ord;
  }
  return ord;
}

AbelianPGroup::Element AbelianPGroup::generator(std::size_t i) const {
  return static_cast<Element>(weights_.at(i));
}

int ell(const AbelianPGroup& g) { return g.lambda().size(); }

mpz_class hom_count(const Partition& lambda, const Partition& mu, std::uint64_t p) {
  unsigned long exponent = 0;
  for (int a : lambda.parts())
    for (int b : mu.parts()) exponent += static_cast<unsigned long>(std::min(a, b));
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(p), exponent);
  return out;
}

bool Subgroup::is_subset_of(const Subgroup& other) const {
  for (std::size_t w = 0; w < bits.size(); ++w)
    if (bits[w] & ~other.bits[w]) return false;
  return true;
}

namespace {

Subgroup make_subgroup(std::vector<AbelianPGroup::Element> elements, std::size_t group_order) {
  Subgroup h;
  h.bits.assign((group_order + 63) / 64, 0);
  std::sort(elements.begin(), elements.end());
  for (auto x : elements) h.bits[x >> 6] |= std::uint64_t{1} << (x & 63);
  h.elements = std::move(elements);
  return h;
}

// H + <g>: union of the cosets H + m g for m below the order of g mod H.
Subgroup join_cyclic(const AbelianPGroup& g, const Subgroup& h, AbelianPGroup::Element gen) {
  const std::size_t n = g.element_count();
  std::vector<AbelianPGroup::Element> out = h.elements;
  AbelianPGroup::Element step = gen;
  while (!h.contains(step)) {
    for (auto x : h.elements) out.push_back(g.add(x, step));
    step = g.add(step, gen);
  }
  return make_subgroup(std::move(out), n);
}

struct BitsHash {
  std::size_t operator()(const std::vector<std::uint64_t>& w) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto x : w) {
      h ^= x;
      h *= 1099511628211ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

Subgroup generated_subgroup(const AbelianPGroup& g, std::span<const AbelianPGroup::Element> gens) {
  Subgroup h = make_subgroup({g.zero()}, g.element_count());
  for (auto x : gens)
    if (!h.contains(x)) h = join_cyclic(g, h, x);
  return h;
}

SubgroupLattice enumerate_subgroups(const AbelianPGroup& g, std::size_t max_subgroups) {
  const std::size_t n = g.element_count();
  SubgroupLattice lattice(g);

  std::vector<Subgroup> found;
  std::unordered_map<std::vector<std::uint64_t>, std::size_t, BitsHash> seen;
  found.push_back(make_subgroup({g.zero()}, n));
  seen.emplace(found.front().bits, 0);

  std::vector<bool> done(n);
  for (std::size_t cur = 0; cur < found.size(); ++cur) {
    std::fill(done.begin(), done.end(), false);
    for (auto x : found[cur].elements) done[x] = true;
    for (AbelianPGroup::Element x = 0; x < n; ++x) {
      if (done[x]) continue;
      // <H, x> depends only on the coset x + H.
      for (auto h : found[cur].elements) done[g.add(x, h)] = true;
      Subgroup k = join_cyclic(g, found[cur], x);
      if (seen.contains(k.bits)) continue;
      if (found.size() >= max_subgroups)
        throw GuardError("subgroup lattice of " + g.lambda().to_string() + " over p=" +
                         std::to_string(g.prime()) + " exceeds " + std::to_string(max_subgroups) +
                         " subgroups");
      seen.emplace(k.bits, found.size());
      found.push_back(std::move(k));
    }
  }

  std::sort(found.begin(), found.end(), [](const Subgroup& a, const Subgroup& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.elements < b.elements;
  });

  lattice.below_.resize(found.size());
  for (std::size_t j = 0; j < found.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) {
      if (found[i].order() >= found[j].order() || found[j].order() % found[i].order() != 0) continue;
      if (found[i].is_subset_of(found[j])) lattice.below_[j].push_back(static_cast<std::uint32_t>(i));
    }
  lattice.subgroups_ = std::move(found);
  return lattice;
}

bool SubgroupLattice::contains(std::size_t i, std::size_t j) const {
  return subgroups_.at(i).is_subset_of(subgroups_.at(j));
}

std::size_t SubgroupLattice::index_of(const Subgroup& h) const {
  auto it = std::lower_bound(subgroups_.begin(), subgroups_.end(), h, [](const Subgroup& a, const Subgroup& b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.elements < b.elements;
  });
  if (it == subgroups_.end() || !(*it == h)) throw std::invalid_argument("subgroup not in lattice");
  return static_cast<std::size_t>(it - subgroups_.begin());
}

std::size_t SubgroupLattice::index_of_generated(std::span<const AbelianPGroup::Element> gens) const {
  return index_of(generated_subgroup(group_, gens));
}

std::vector<mpz_class> chain_counts(const SubgroupLattice& lattice) {
  const int top = ell(lattice.group());
  const std::size_t s = lattice.size();
  // ending[h]: strict chains {0} < H_1 < ... < H_i = H of the current length i.
  std::vector<mpz_class> ending(s, 0), next(s);
  ending[lattice.trivial_index()] = 1;
  std::vector<mpz_class> out{1};
  for (int i = 1; i <= top; ++i) {
    mpz_class total = 0;
    for (std::size_t j = 0; j < s; ++j) {
      next[j] = 0;
      for (auto b : lattice.strictly_below(j)) next[j] += ending[b];
      total += next[j];
    }
    std::swap(ending, next);
    out.push_back(total);
  }
  return out;
}

mpz_class chain_count(const SubgroupLattice& lattice, int i) {
  if (i < 0) throw std::invalid_argument("chain length must be nonnegative");
  if (i > ell(lattice.group())) return 0;
  return chain_counts(lattice)[static_cast<std::size_t>(i)];
}

mpz_class chain_count(const AbelianPGroup& g, int i) {
  if (i < 0) throw std::invalid_argument("chain length must be nonnegative");
  if (i > ell(g)) return 0;
  if (i == 0) return 1;
  return chain_count(enumerate_subgroups(g), i);
}

}  // namespace cokfluct
