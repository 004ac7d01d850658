#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "cokfluct/partition.hpp"
#include "cokfluct/pgroups.hpp"

namespace cokfluct {

struct FluctuationParams {
  std::uint64_t p = 2;
  double zeta = 0.0;
  double chi = 1.0;  ///< p^(-zeta) / (p - 1)
  int d = 3;

  /// Validates p >= 2, zeta in [0, 1), d >= 1 (DomainError) and recomputes chi.
  FluctuationParams(std::uint64_t p, double zeta, int d);
};

/// The first d centered ranks rank(p^(i-1) Gamma) - centering(k).
struct CenteredRankVector {
  std::vector<long> values;

  std::string to_string() const;  ///< "(-1,-2)"
  auto operator<=>(const CenteredRankVector&) const = default;
};

/// lim E|Hom(cok, G)| / k^ell(G) = c(G, ell(G)) / ell(G)!.
mpq_class limit_rescaled_hom_moment(const AbelianPGroup& g);

/// E p^<L, lambda> = scale * exact with exact = c(G_lambda', |lambda|) / |lambda|!
/// and scale = ((p - 1) chi)^|lambda| = p^(-zeta |lambda|).
struct LMoment {
  mpq_class exact;
  double scale = 1.0;

  double value() const { return exact.get_d() * scale; }
};

/// Throws DomainError when lambda has more than d parts.
LMoment L_moment(const Partition& lambda, const FluctuationParams& params);

/// Integer nearest to log_p k + zeta, ties away from zero.
long centering(std::uint64_t k, const FluctuationParams& params);

/// (lambda'_i - centering(k))_{i=1..d}. Throws ExcludedTrial if free_rank > 0.
CenteredRankVector centered_rank_vector(const Partition& lambda, std::size_t free_rank, std::uint64_t k,
                                        const FluctuationParams& params);

/// sum_i lambda_i * v_i over the first min(d, length) coordinates.
long pairing(const CenteredRankVector& v, const Partition& lambda);

}  // namespace cokfluct
