#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "cokfluct/ensembles.hpp"
#include "cokfluct/partition.hpp"
#include "cokfluct/pgroups.hpp"
#include "cokfluct/theory.hpp"

namespace cokfluct {

inline constexpr int kMaxPrecision = 256;

struct TrialRecord {
  std::uint64_t trial = 0;
  Partition partition;              ///< valuations in [1, precision_used)
  std::size_t free_rank = 0;
  std::size_t saturated_count = 0;  ///< divisors only known to have valuation >= precision_used
  int precision_used = 0;

  bool saturated() const { return saturated_count > 0; }
  bool operator==(const TrialRecord&) const = default;
};

/// Which elimination runs a block-structured trial. kDense assembles the
/// full matrix first; it is the reference the streaming kernel is tested and
/// benchmarked against.
enum class TrialKernel { kStreaming, kDense };

/// One trial with the precision-escalation policy: start at the ensemble's N,
/// double while divisors saturate (up to kMaxPrecision), and separate free
/// rank from saturation by an exact rank computation.
TrialRecord run_trial(const EnsembleSpec& spec, std::uint64_t trial, TrialKernel kernel = TrialKernel::kStreaming);

/// |Hom(Gamma + Z^free_rank, G)|.
mpz_class hom_moment_of_trial(const Partition& partition, std::size_t free_rank, const AbelianPGroup& g);

struct Estimate {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t samples = 0;
};

struct HomMomentRow {
  Partition group;   ///< mu with G = G_mu
  Estimate rescaled; ///< E|Hom(cok, G)| / k^ell(G)
  std::optional<mpq_class> target;  ///< c(G, ell) / ell!; empty if the lattice guard trips
};

struct LMomentRow {
  Partition lambda;
  Estimate estimate;  ///< E p^<centered, lambda>
  LMoment target;
};

struct HistogramBin {
  CenteredRankVector vector;
  std::size_t count = 0;
  double mass = 0.0;
};

struct ExperimentOptions {
  int workers = 0;  ///< 0: COKFLUCT_WORKERS or the OpenMP default
  TrialKernel kernel = TrialKernel::kStreaming;
  std::size_t bootstrap_resamples = 1000;
};

struct ExperimentReport {
  EnsembleSpec spec;
  std::size_t trial_count = 0;
  int d = 3;
  double zeta = 0.0;
  long center = 0;
  std::size_t included_count = 0;        ///< finite, unsaturated cokernels
  std::size_t free_rank_count = 0;
  std::size_t saturated_count = 0;       ///< saturated at kMaxPrecision, no free rank
  std::vector<TrialRecord> records;      ///< sorted by trial
  std::vector<HomMomentRow> hom_moments;
  std::vector<LMomentRow> l_moments;
  std::vector<HistogramBin> histogram;   ///< sorted by vector
  std::vector<std::string> warnings;

  std::size_t excluded_count() const { return trial_count - included_count; }
};

/// Worker count after applying COKFLUCT_WORKERS.
int effective_workers(int requested);

ExperimentReport run_experiment(const EnsembleSpec& spec, std::size_t trials, const std::vector<Partition>& groups,
                                const std::vector<Partition>& lambdas, int d, const ExperimentOptions& options = {});

/// Builds every aggregate of a report from its records (sorted internally).
ExperimentReport aggregate(const EnsembleSpec& spec, std::vector<TrialRecord> records,
                           const std::vector<Partition>& groups, const std::vector<Partition>& lambdas, int d,
                           std::size_t bootstrap_resamples = 1000);

struct MomentGap {
  Partition lambda;
  double a = 0.0, b = 0.0;
  double gap = 0.0;  ///< a - b
};

struct Comparison {
  double tv_distance = 0.0;
  std::vector<MomentGap> l_moment_gaps;
  std::vector<MomentGap> hom_moment_gaps;
};

/// Throws ParameterMismatch unless p, d and the zeta targets agree.
Comparison compare_ensembles(const ExperimentReport& a, const ExperimentReport& b);

/// Total variation distance between two histograms.
double tv_distance(const std::vector<HistogramBin>& a, const std::vector<HistogramBin>& b);

}  // namespace cokfluct
