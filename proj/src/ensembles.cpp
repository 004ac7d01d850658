#include "cokfluct/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cokfluct/detail/elimination.hpp"
#include "cokfluct/errors.hpp"

namespace cokfluct {

namespace {

bool is_prime(std::uint64_t p) {
  if (p < 2) return false;
  for (std::uint64_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

std::int64_t floor_mod(std::int64_t x, std::int64_t m) {
  std::int64_t r = x % m;
  return r < 0 ? r + m : r;
}

// Count of integers in [a, b] congruent to r mod m.
std::uint64_t residue_count(std::int64_t a, std::int64_t b, std::int64_t r, std::int64_t m) {
  const std::int64_t first = a + floor_mod(r - a, m);
  if (first > b) return 0;
  return static_cast<std::uint64_t>((b - first) / m) + 1;
}

}  // namespace

EntryDistribution EntryDistribution::uniform_mod(std::int64_t m) {
  if (m < 1) throw ConfigError("uniform_mod needs a positive modulus");
  EntryDistribution d;
  d.kind_ = Kind::kUniformMod;
  d.lo_ = m;
  d.hi_ = m - 1;
  return d;
}

EntryDistribution EntryDistribution::bernoulli(mpq_class q) {
  q.canonicalize();
  if (q < 0 || q > 1) throw ConfigError("bernoulli parameter must lie in [0, 1]");
  EntryDistribution d;
  d.kind_ = Kind::kBernoulli;
  d.q_ = q;
  d.support_ = {{0, 1 - q}, {1, q}};
  d.build_cumulative();
  return d;
}

EntryDistribution EntryDistribution::uniform_range(std::int64_t a, std::int64_t b) {
  if (a > b) throw ConfigError("uniform_range needs a <= b");
  if (static_cast<unsigned __int128>(static_cast<__int128>(b) - a) >= (static_cast<unsigned __int128>(1) << 63))
    throw ConfigError("uniform_range is too wide");
  EntryDistribution d;
  d.kind_ = Kind::kUniformRange;
  d.lo_ = a;
  d.hi_ = b;
  return d;
}

EntryDistribution EntryDistribution::finite_support(std::vector<std::pair<std::int64_t, mpq_class>> weighted) {
  if (weighted.empty()) throw ConfigError("finite_support needs at least one value");
  std::map<std::int64_t, mpq_class> merged;
  mpq_class total = 0;
  for (auto& [v, w] : weighted) {
    w.canonicalize();
    if (w <= 0) throw ConfigError("finite_support weights must be positive");
    merged[v] += w;
    total += w;
  }
  EntryDistribution d;
  d.kind_ = Kind::kFiniteSupport;
  for (auto& [v, w] : merged) d.support_.emplace_back(v, mpq_class(w / total));
  d.build_cumulative();
  return d;
}

EntryDistribution EntryDistribution::constant(std::int64_t v) {
  EntryDistribution d;
  d.kind_ = Kind::kConstant;
  d.lo_ = v;
  d.hi_ = v;
  return d;
}

void EntryDistribution::build_cumulative() {
  cumulative_.clear();
  mpq_class acc = 0;
  for (const auto& [v, w] : support_) {
    acc += w;
    cumulative_.push_back(acc.get_d());
  }
}

std::int64_t EntryDistribution::sample(TrialRng& rng) const {
  switch (kind_) {
    case Kind::kUniformMod:
      return static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(lo_)));
    case Kind::kUniformRange:
      return lo_ + static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(hi_ - lo_) + 1));
    case Kind::kConstant:
      return lo_;
    case Kind::kBernoulli:
    case Kind::kFiniteSupport: {
      const double u = rng.uniform01();
      for (std::size_t i = 0; i + 1 < support_.size(); ++i)
        if (u < cumulative_[i]) return support_[i].first;
      return support_.back().first;
    }
  }
  return 0;
}

std::vector<std::pair<std::int64_t, mpq_class>> EntryDistribution::exact_pmf(std::size_t max_support) const {
  switch (kind_) {
    case Kind::kConstant:
      return {{lo_, mpq_class(1)}};
    case Kind::kBernoulli: {
      std::vector<std::pair<std::int64_t, mpq_class>> out;
      for (const auto& e : support_)
        if (e.second != 0) out.push_back(e);
      return out;
    }
    case Kind::kFiniteSupport:
      return support_;
    case Kind::kUniformMod:
    case Kind::kUniformRange: {
      const std::int64_t a = kind_ == Kind::kUniformMod ? 0 : lo_;
      const std::int64_t b = hi_;
      const auto count = static_cast<std::uint64_t>(b - a) + 1;
      if (count > max_support) throw GuardError("support too large for an exact pmf");
      std::vector<std::pair<std::int64_t, mpq_class>> out;
      const mpq_class w(1, static_cast<unsigned long>(count));
      for (std::int64_t v = a; v <= b; ++v) out.emplace_back(v, w);
      return out;
    }
  }
  return {};
}

mpq_class EntryDistribution::max_residue_mass(std::uint64_t p) const {
  const auto m = static_cast<std::int64_t>(p);
  switch (kind_) {
    case Kind::kConstant:
      return 1;
    case Kind::kUniformMod:
    case Kind::kUniformRange: {
      const std::int64_t a = kind_ == Kind::kUniformMod ? 0 : lo_;
      const std::int64_t b = hi_;
      const auto count = static_cast<std::uint64_t>(b - a) + 1;
      std::uint64_t best = 0;
      if (count >= p) {
        // consecutive integers: residue classes differ by at most one
        best = (count + p - 1) / p;
      } else {
        for (std::int64_t r = 0; r < m; ++r) best = std::max(best, residue_count(a, b, r, m));
      }
      mpq_class out(static_cast<unsigned long>(best), static_cast<unsigned long>(count));
      out.canonicalize();
      return out;
    }
    case Kind::kBernoulli:
    case Kind::kFiniteSupport: {
      std::map<std::int64_t, mpq_class> mass;
      for (const auto& [v, w] : support_) mass[floor_mod(v, m)] += w;
      mpq_class best = 0;
      for (const auto& [r, w] : mass) best = std::max(best, w);
      return best;
    }
  }
  return 1;
}

mpq_class EntryDistribution::best_epsilon(std::uint64_t p) const { return 1 - max_residue_mass(p); }

bool EntryDistribution::is_balanced(std::span<const std::uint64_t> primes, const mpq_class& eps) const {
  for (auto p : primes) {
    const mpq_class e = best_epsilon(p);
    if (e <= 0 || e < eps) return false;
  }
  return true;
}

std::string EntryDistribution::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::kUniformMod:
      out << "uniform_mod " << lo_;
      break;
    case Kind::kBernoulli:
      out << "bernoulli " << q_.get_str();
      break;
    case Kind::kUniformRange:
      out << "uniform_range [" << lo_ << "," << hi_ << "]";
      break;
    case Kind::kConstant:
      out << "constant " << lo_;
      break;
    case Kind::kFiniteSupport:
      out << "finite_support {";
      for (std::size_t i = 0; i < support_.size(); ++i)
        out << (i ? ", " : "") << support_[i].first << ":" << support_[i].second.get_str();
      out << "}";
      break;
  }
  return out.str();
}

bool EntryDistribution::operator==(const EntryDistribution& other) const {
  return kind_ == other.kind_ && lo_ == other.lo_ && hi_ == other.hi_ && q_ == other.q_ &&
         support_ == other.support_;
}

std::string to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::kBlockTriangular:
      return "block_triangular";
    case EnsembleKind::kMatrixProduct:
      return "matrix_product";
    case EnsembleKind::kBidiagonalEmbedding:
      return "bidiagonal_embedding";
  }
  return "?";
}

EnsembleKind parse_ensemble_kind(const std::string& name) {
  if (name == "block_triangular") return EnsembleKind::kBlockTriangular;
  if (name == "matrix_product") return EnsembleKind::kMatrixProduct;
  if (name == "bidiagonal_embedding") return EnsembleKind::kBidiagonalEmbedding;
  throw ConfigError("unknown ensemble kind '" + name + "'");
}

std::vector<std::size_t> EnsembleSpec::sizes() const {
  if (kind == EnsembleKind::kBlockTriangular && !block_sizes.empty()) return block_sizes;
  return std::vector<std::size_t>(k, n);
}

std::size_t EnsembleSpec::dimension() const {
  if (kind == EnsembleKind::kMatrixProduct) return n;
  const auto s = sizes();
  return std::accumulate(s.begin(), s.end(), std::size_t{0});
}

std::size_t EnsembleSpec::min_block() const {
  const auto s = sizes();
  return s.empty() ? 0 : *std::min_element(s.begin(), s.end());
}

int EnsembleSpec::starting_precision() const { return precision > 0 ? precision : default_precision(p, k); }

double EnsembleSpec::zeta_target() const { return zeta ? *zeta : fractional_neg_log(p, k); }

void EnsembleSpec::validate() const {
  if (!is_prime(p)) throw ConfigError("p = " + std::to_string(p) + " is not prime");
  if (k < 1) throw ConfigError("k must be at least 1");
  if (kind == EnsembleKind::kBlockTriangular && !block_sizes.empty()) {
    if (block_sizes.size() != k)
      throw ConfigError("block_sizes has " + std::to_string(block_sizes.size()) + " entries but k = " +
                        std::to_string(k));
    for (auto s : block_sizes)
      if (s == 0) throw ConfigError("block sizes must be positive");
  } else if (n < 1) {
    throw ConfigError("n must be at least 1");
  }
  if (precision < 0 || precision > 256) throw ConfigError("precision must lie in [1, 256] (or 0 for auto)");
  if (zeta && (*zeta < 0.0 || *zeta >= 1.0)) throw ConfigError("zeta must lie in [0, 1)");
  const mpq_class eps = a_dist.best_epsilon(p);
  if (eps <= 0 || eps < min_epsilon) {
    const bool product = kind != EnsembleKind::kBlockTriangular;
    throw ConfigError(std::string("A entry distribution ") + a_dist.describe() + " is not (" +
                      std::to_string(p) + ", eps)-balanced" +
                      (product ? " (factor entries must be nonconstant mod p)" : "") +
                      "; assumption A.3 requires balanced A-block entries (best eps = " + eps.get_str() +
                      ", required >= " + min_epsilon.get_str() + ")");
  }
}

int default_precision(std::uint64_t p, std::uint64_t k) {
  int e = 0;
  unsigned __int128 pe = 1;
  while (pe < k) {
    pe *= p;
    ++e;
  }
  return std::max(16, e + 8);
}

double fractional_neg_log(std::uint64_t p, std::uint64_t k) {
  unsigned __int128 pe = 1;
  while (pe < k) pe *= p;
  if (pe == k) return 0.0;
  const long double x = -std::log(static_cast<long double>(k)) / std::log(static_cast<long double>(p));
  return static_cast<double>(x - std::floor(x));
}

std::uint64_t realized_k(std::uint64_t p, int m, double zeta) {
  const long double v = std::pow(static_cast<long double>(p), static_cast<long double>(m) - zeta);
  const auto k = static_cast<std::uint64_t>(std::llround(v));
  return std::max<std::uint64_t>(k, 2);
}

std::vector<std::uint64_t> KSchedule::ks(std::uint64_t p) const {
  std::vector<std::uint64_t> out;
  for (int m : m_range) out.push_back(realized_k(p, m, zeta_target));
  return out;
}

IntMatrix SmallIntMatrix::to_int_matrix() const {
  IntMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = static_cast<long>((*this)(r, c));
  return out;
}

PadicMatrix SmallIntMatrix::reduce(std::uint64_t p, int precision) const {
  PadicMatrix out(rows, cols, p, precision);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out.set(r, c, static_cast<long>((*this)(r, c)));
  return out;
}

BlockLowerMatrix BlockSample::reduce(std::uint64_t p, int precision) const {
  BlockLowerMatrix out(sizes, p, precision);
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j)
      if (blocks[i][j]) out.set_block(i, j, blocks[i][j]->reduce(p, precision));
  return out;
}

IntMatrix BlockSample::assemble() const {
  const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  IntMatrix out(n, n);
  std::size_t r0 = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    std::size_t c0 = 0;
    for (std::size_t j = 0; j <= i; ++j) {
      if (const auto& b = blocks[i][j])
        for (std::size_t r = 0; r < sizes[i]; ++r)
          for (std::size_t c = 0; c < sizes[j]; ++c) out(r0 + r, c0 + c) = static_cast<long>((*b)(r, c));
      c0 += sizes[j];
    }
    r0 += sizes[i];
  }
  return out;
}

namespace {

SmallIntMatrix draw(const EntryDistribution& dist, TrialRng& rng, std::size_t rows, std::size_t cols) {
  SmallIntMatrix m(rows, cols);
  for (auto& x : m.a) x = dist.sample(rng);
  return m;
}

}  // namespace

BlockSample sample_block_integers(const EnsembleSpec& spec, std::uint64_t trial) {
  if (spec.kind != EnsembleKind::kBlockTriangular) throw ConfigError("sample_block_integers needs a block_triangular spec");
  spec.validate();
  BlockSample out;
  out.sizes = spec.sizes();
  const std::size_t k = out.sizes.size();
  out.blocks.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.blocks[i].resize(i + 1);

  TrialRng a_rng(spec.master_seed, trial, Stream::kAEntries);
  for (std::size_t i = 0; i < k; ++i) {
    if (i > 0) out.blocks[i][i - 1] = draw(spec.a_dist, a_rng, out.sizes[i], out.sizes[i - 1]);
    out.blocks[i][i] = draw(spec.a_dist, a_rng, out.sizes[i], out.sizes[i]);
  }

  const bool b_zero =
      spec.b_dist.kind() == EntryDistribution::Kind::kConstant && spec.b_dist.lo() == 0;
  if (!b_zero) {
    TrialRng b_rng(spec.master_seed, trial, Stream::kBEntries);
    for (std::size_t i = 2; i < k; ++i)
      for (std::size_t j = 0; j + 2 <= i; ++j) out.blocks[i][j] = draw(spec.b_dist, b_rng, out.sizes[i], out.sizes[j]);
  }
  return out;
}

std::vector<SmallIntMatrix> sample_factor_integers(const EnsembleSpec& spec, std::uint64_t trial) {
  if (spec.kind == EnsembleKind::kBlockTriangular) throw ConfigError("sample_factor_integers needs a factor ensemble");
  spec.validate();
  TrialRng rng(spec.master_seed, trial, Stream::kAEntries);
  std::vector<SmallIntMatrix> out;
  out.reserve(spec.k);
  for (std::size_t i = 0; i < spec.k; ++i) out.push_back(draw(spec.a_dist, rng, spec.n, spec.n));
  return out;
}

PadicMatrix sample_block_matrix(const EnsembleSpec& spec, std::uint64_t trial) {
  return sample_block_layout(spec, trial, spec.starting_precision()).assemble();
}

BlockLowerMatrix sample_block_layout(const EnsembleSpec& spec, std::uint64_t trial, int precision) {
  return sample_block_integers(spec, trial).reduce(spec.p, precision);
}

PadicMatrix sample_product(const EnsembleSpec& spec, std::uint64_t trial) {
  if (spec.kind != EnsembleKind::kMatrixProduct) throw ConfigError("sample_product needs a matrix_product spec");
  const auto factors = sample_factor_integers(spec, trial);
  return product_mod(factors, spec.p, spec.starting_precision());
}

PadicMatrix product_mod(std::span<const SmallIntMatrix> factors, std::uint64_t p, int precision) {
  if (factors.empty()) throw StructuralError("product needs at least one factor");
  const std::size_t n = factors.front().rows;
  for (const auto& f : factors)
    if (f.rows != n || f.cols != n) throw StructuralError("product factors must be square of one common size");
  PadicMatrix out(n, n, p, precision);
  detail::dispatch_ring(p, precision, [&](const auto& R) {
    using V = typename std::decay_t<decltype(R)>::value_type;
    auto lift = [&](const SmallIntMatrix& f) {
      detail::Dense<V> d(f.rows, f.cols, R.zero());
      for (std::size_t i = 0; i < f.a.size(); ++i) d.a[i] = R.from_int(f.a[i]);
      return d;
    };
    auto acc = lift(factors.front());
    for (std::size_t i = 1; i < factors.size(); ++i) acc = detail::multiply(R, acc, lift(factors[i]));
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) out.set(r, c, R.to_mpz(acc(r, c)));
  });
  return out;
}

IntMatrix product_exact(std::span<const SmallIntMatrix> factors) {
  if (factors.empty()) throw StructuralError("product needs at least one factor");
  IntMatrix acc = factors.front().to_int_matrix();
  for (std::size_t i = 1; i < factors.size(); ++i) acc = acc * factors[i].to_int_matrix();
  return acc;
}

namespace {

void check_factors(std::size_t count, std::size_t n, bool same) {
  if (count == 0) throw StructuralError("embedding needs at least one factor");
  if (!same) throw StructuralError("embedding factors must be square of one common size (n = " + std::to_string(n) + ")");
}

}  // namespace

BlockLowerMatrix bidiagonal_layout(std::span<const PadicMatrix> factors) {
  check_factors(factors.size(), factors.empty() ? 0 : factors.front().rows(), true);
  const std::size_t n = factors.front().rows();
  const auto p = factors.front().prime();
  const int precision = factors.front().precision();
  for (const auto& f : factors)
    if (f.rows() != n || f.cols() != n || f.prime() != p || f.precision() != precision)
      check_factors(factors.size(), n, false);
  BlockLowerMatrix out(std::vector<std::size_t>(factors.size(), n), p, precision);
  for (std::size_t i = 0; i < factors.size(); ++i) {
    out.set_block(i, i, factors[i]);
    if (i > 0) out.set_block(i, i - 1, PadicMatrix::identity(n, p, precision));
  }
  return out;
}

PadicMatrix build_bidiagonal_embedding(std::span<const PadicMatrix> factors) {
  return bidiagonal_layout(factors).assemble();
}

IntMatrix build_bidiagonal_embedding(std::span<const IntMatrix> factors) {
  check_factors(factors.size(), factors.empty() ? 0 : factors.front().rows(), true);
  const std::size_t n = factors.front().rows();
  for (const auto& f : factors)
    if (f.rows() != n || f.cols() != n) check_factors(factors.size(), n, false);
  const std::size_t k = factors.size();
  IntMatrix out(n * k, n * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) out(i * n + r, i * n + c) = factors[i](r, c);
    if (i > 0)
      for (std::size_t r = 0; r < n; ++r) out(i * n + r, (i - 1) * n + r) = 1;
  }
  return out;
}

}  // namespace cokfluct
