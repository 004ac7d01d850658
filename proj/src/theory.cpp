#include "cokfluct/theory.hpp"

#include <cmath>
#include <sstream>

#include "cokfluct/errors.hpp"

namespace cokfluct {

namespace {

mpz_class factorial(int n) {
  mpz_class out;
  mpz_fac_ui(out.get_mpz_t(), static_cast<unsigned long>(n));
  return out;
}

}  // namespace

FluctuationParams::FluctuationParams(std::uint64_t p_, double zeta_, int d_) : p(p_), zeta(zeta_), d(d_) {
  if (p < 2) throw DomainError("p must be a prime >= 2");
  if (!(zeta >= 0.0 && zeta < 1.0)) throw DomainError("zeta must lie in [0, 1)");
  if (d < 1) throw DomainError("d must be positive");
  chi = std::pow(static_cast<double>(p), -zeta) / static_cast<double>(p - 1);
}

std::string CenteredRankVector::to_string() const {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  out << ")";
  return out.str();
}

mpq_class limit_rescaled_hom_moment(const AbelianPGroup& g) {
  const int l = ell(g);
  mpq_class out(chain_count(g, l), factorial(l));
  out.canonicalize();
  return out;
}

LMoment L_moment(const Partition& lambda, const FluctuationParams& params) {
  if (lambda.length() > static_cast<std::size_t>(params.d))
    throw DomainError("partition " + lambda.to_string() + " has more than d = " + std::to_string(params.d) +
                      " parts");
  const int size = lambda.size();
  LMoment out;
  if (size == 0) {
    out.exact = 1;
    return out;
  }
  const AbelianPGroup g(params.p, lambda.conjugate());
  out.exact = mpq_class(chain_count(g, size), factorial(size));
  out.exact.canonicalize();
  out.scale = std::pow(static_cast<double>(params.p), -params.zeta * size);
  return out;
}

long centering(std::uint64_t k, const FluctuationParams& params) {
  if (k == 0) throw DomainError("centering needs k >= 1");
  // exact path: k = p^m
  unsigned __int128 pe = 1;
  long m = 0;
  while (pe < k) {
    pe *= params.p;
    ++m;
  }
  if (pe == k) return m + (params.zeta >= 0.5 ? 1 : 0);
  const long double x = std::log(static_cast<long double>(k)) / std::log(static_cast<long double>(params.p)) +
                        static_cast<long double>(params.zeta);
  return std::lroundl(x);
}

CenteredRankVector centered_rank_vector(const Partition& lambda, std::size_t free_rank, std::uint64_t k,
                                        const FluctuationParams& params) {
  if (free_rank > 0) throw ExcludedTrial("cokernel has free rank " + std::to_string(free_rank));
  const Partition conj = lambda.conjugate();
  const long c = centering(k, params);
  CenteredRankVector out;
  out.values.reserve(static_cast<std::size_t>(params.d));
  for (int i = 1; i <= params.d; ++i) out.values.push_back(conj.part(static_cast<std::size_t>(i)) - c);
  return out;
}

long pairing(const CenteredRankVector& v, const Partition& lambda) {
  long out = 0;
  for (std::size_t i = 0; i < v.values.size() && i < lambda.length(); ++i) out += v.values[i] * lambda.parts()[i];
  return out;
}

}  // namespace cokfluct
