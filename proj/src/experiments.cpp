#include "cokfluct/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>

#include <omp.h>

#include "cokfluct/errors.hpp"
#include "cokfluct/exact_linalg.hpp"

namespace cokfluct {

namespace {

// 2^61 - 1; full rank modulo a prime certifies full rank over Q.
constexpr std::uint64_t kRankPrime = (std::uint64_t{1} << 61) - 1;

class TrialSource {
 public:
  TrialSource(const EnsembleSpec& spec, std::uint64_t trial, TrialKernel kernel) : spec_(spec), kernel_(kernel) {
    if (spec.kind == EnsembleKind::kBlockTriangular)
      blocks_ = sample_block_integers(spec, trial);
    else
      factors_ = sample_factor_integers(spec, trial);
  }

  DivisorValuations eliminate(std::uint64_t p, int precision) const {
    switch (spec_.kind) {
      case EnsembleKind::kBlockTriangular:
        return run(blocks_.reduce(p, precision));
      case EnsembleKind::kMatrixProduct:
        return padic_valuations(product_mod(factors_, p, precision));
      case EnsembleKind::kBidiagonalEmbedding: {
        std::vector<PadicMatrix> reduced;
        reduced.reserve(factors_.size());
        for (const auto& f : factors_) reduced.push_back(f.reduce(p, precision));
        return run(bidiagonal_layout(reduced));
      }
    }
    return {};
  }

  std::size_t free_rank() const {
    if (eliminate(kRankPrime, 1).saturated_count == 0) return 0;
    if (spec_.kind == EnsembleKind::kBlockTriangular) {
      const IntMatrix m = blocks_.assemble();
      return m.cols() - exact_rank(m);
    }
    // the embedding and the product have isomorphic cokernels
    const IntMatrix m = product_exact(factors_);
    return m.cols() - exact_rank(m);
  }

 private:
  DivisorValuations run(const BlockLowerMatrix& m) const {
    return kernel_ == TrialKernel::kStreaming ? streaming_block_eliminate(m) : padic_valuations(m.assemble());
  }

  const EnsembleSpec& spec_;
  TrialKernel kernel_;
  BlockSample blocks_;
  std::vector<SmallIntMatrix> factors_;
};

// Percentile bootstrap of the mean.
Estimate estimate_mean(const std::vector<double>& values, std::uint64_t seed, std::uint64_t stat_id,
                       std::size_t resamples) {
  Estimate out;
  out.samples = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  out.mean = sum / n;
  if (resamples == 0) {
    out.ci_low = out.ci_high = out.mean;
    return out;
  }
  TrialRng rng(seed, stat_id, Stream::kBootstrap);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[rng.bounded(values.size())];
    m = s / n;
  }
  std::sort(means.begin(), means.end());
  const std::size_t lo = resamples * 25 / 1000;
  const std::size_t hi = std::max<std::size_t>(resamples * 975 / 1000, 1) - 1;
  out.ci_low = means[std::min(lo, resamples - 1)];
  out.ci_high = means[std::max(hi, std::min(lo, resamples - 1))];
  return out;
}

double power(std::uint64_t p, long e) {
  if (p == 2) return std::ldexp(1.0, static_cast<int>(e));
  return std::pow(static_cast<double>(p), static_cast<double>(e));
}

// Saturated divisors have valuation >= precision_used, which already exceeds
// every exponent of G, so min(v, mu_j) is known for them.
Partition hom_partition(const TrialRecord& r, const Partition& mu) {
  if (!r.saturated()) return r.partition;
  if (mu.part(1) > r.precision_used)
    throw DomainError("group exponent exceeds the precision of a saturated trial");
  std::vector<int> parts = r.partition.parts();
  parts.insert(parts.end(), r.saturated_count, r.precision_used);
  return Partition::from_unsorted(std::move(parts));
}

constexpr std::uint64_t kLMomentStatBase = 1u << 20;

}  // namespace

TrialRecord run_trial(const EnsembleSpec& spec, std::uint64_t trial, TrialKernel kernel) {
  const TrialSource source(spec, trial, kernel);
  std::optional<std::size_t> free;
  int precision = std::min(spec.starting_precision(), kMaxPrecision);
  for (;;) {
    const DivisorValuations dv = source.eliminate(spec.p, precision);
    if (dv.saturated_count > 0 && !free) free = source.free_rank();
    const std::size_t free_rank = free.value_or(0);
    if (dv.saturated_count == free_rank || precision >= kMaxPrecision) {
      TrialRecord r;
      r.trial = trial;
      r.partition = dv.partition();
      r.free_rank = free_rank;
      r.saturated_count = dv.saturated_count - free_rank;
      r.precision_used = precision;
      return r;
    }
    precision = std::min(2 * precision, kMaxPrecision);
  }
}

mpz_class hom_moment_of_trial(const Partition& partition, std::size_t free_rank, const AbelianPGroup& g) {
  mpz_class out = hom_count(partition, g.lambda(), g.prime());
  mpz_class order_power;
  mpz_pow_ui(order_power.get_mpz_t(), g.order().get_mpz_t(), static_cast<unsigned long>(free_rank));
  return out * order_power;
}

int effective_workers(int requested) {
  int w = requested > 0 ? requested : omp_get_max_threads();
  if (const char* env = std::getenv("COKFLUCT_WORKERS")) {
    const int cap = std::atoi(env);
    if (cap > 0) w = std::min(w, cap);
  }
  return std::max(w, 1);
}

ExperimentReport run_experiment(const EnsembleSpec& spec, std::size_t trials, const std::vector<Partition>& groups,
                                const std::vector<Partition>& lambdas, int d, const ExperimentOptions& options) {
  spec.validate();
  if (d < 1) throw ConfigError("d must be positive");
  for (const auto& l : lambdas)
    if (l.length() > static_cast<std::size_t>(d))
      throw ConfigError("partition " + l.to_string() + " has more than d = " + std::to_string(d) + " parts");

  std::vector<TrialRecord> records(trials);
  std::exception_ptr failure;
  const int workers = effective_workers(options.workers);
  const auto count = static_cast<long long>(trials);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (long long t = 0; t < count; ++t) {
    try {
      records[static_cast<std::size_t>(t)] = run_trial(spec, static_cast<std::uint64_t>(t), options.kernel);
    } catch (...) {
#pragma omp critical(cokfluct_trial_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(spec, std::move(records), groups, lambdas, d, options.bootstrap_resamples);
}

ExperimentReport aggregate(const EnsembleSpec& spec, std::vector<TrialRecord> records,
                           const std::vector<Partition>& groups, const std::vector<Partition>& lambdas, int d,
                           std::size_t bootstrap_resamples) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.trial < b.trial; });

  ExperimentReport rep;
  rep.spec = spec;
  rep.trial_count = records.size();
  rep.d = d;
  rep.zeta = spec.zeta_target();
  const FluctuationParams params(spec.p, rep.zeta, d);
  rep.center = centering(spec.k, params);

  std::vector<CenteredRankVector> centered;
  std::map<CenteredRankVector, std::size_t> bins;
  for (const auto& r : records) {
    if (r.free_rank > 0) {
      ++rep.free_rank_count;
      continue;
    }
    if (r.saturated()) {
      ++rep.saturated_count;
      continue;
    }
    centered.push_back(centered_rank_vector(r.partition, 0, spec.k, params));
    ++bins[centered.back()];
  }
  rep.included_count = centered.size();
  for (const auto& [v, c] : bins)
    rep.histogram.push_back({v, c, static_cast<double>(c) / static_cast<double>(rep.included_count)});

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const AbelianPGroup g(spec.p, groups[gi]);
    mpz_class denom;
    mpz_ui_pow_ui(denom.get_mpz_t(), static_cast<unsigned long>(spec.k), static_cast<unsigned long>(ell(g)));
    std::vector<double> values;
    values.reserve(records.size());
    for (const auto& r : records) {
      mpq_class v(hom_moment_of_trial(hom_partition(r, g.lambda()), r.free_rank, g), denom);
      v.canonicalize();
      values.push_back(v.get_d());
    }
    HomMomentRow row;
    row.group = groups[gi];
    row.rescaled = estimate_mean(values, spec.master_seed, gi, bootstrap_resamples);
    try {
      row.target = limit_rescaled_hom_moment(g);
    } catch (const GuardError&) {
      rep.warnings.push_back("no closed-form target for G = " + groups[gi].to_string() + " (lattice guard)");
    }
    rep.hom_moments.push_back(std::move(row));
  }

  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    std::vector<double> values;
    values.reserve(centered.size());
    for (const auto& v : centered) values.push_back(power(spec.p, pairing(v, lambdas[li])));
    LMomentRow row;
    row.lambda = lambdas[li];
    row.estimate = estimate_mean(values, spec.master_seed, kLMomentStatBase + li, bootstrap_resamples);
    row.target = L_moment(lambdas[li], params);
    rep.l_moments.push_back(std::move(row));
  }

  const std::size_t n_min = spec.kind == EnsembleKind::kBlockTriangular ? spec.min_block() : spec.n;
  const double growth = std::log(static_cast<double>(spec.k)) / static_cast<double>(n_min);
  if (growth > 0.25)
    rep.warnings.push_back("ln k / n = " + std::to_string(growth) + " exceeds 0.25; finite-size effects likely");
  if (rep.saturated_count > 0)
    rep.warnings.push_back(std::to_string(rep.saturated_count) + " trial(s) saturated at precision " +
                           std::to_string(kMaxPrecision));
  rep.records = std::move(records);
  return rep;
}

double tv_distance(const std::vector<HistogramBin>& a, const std::vector<HistogramBin>& b) {
  std::map<CenteredRankVector, std::pair<double, double>> joint;
  for (const auto& x : a) joint[x.vector].first += x.mass;
  for (const auto& x : b) joint[x.vector].second += x.mass;
  double sum = 0.0;
  for (const auto& [v, m] : joint) sum += std::abs(m.first - m.second);
  return sum / 2.0;
}

Comparison compare_ensembles(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.spec.p != b.spec.p)
    throw ParameterMismatch("reports use different primes (" + std::to_string(a.spec.p) + " vs " +
                            std::to_string(b.spec.p) + ")");
  if (a.d != b.d) throw ParameterMismatch("reports use different d");
  if (std::abs(a.zeta - b.zeta) > 1e-9) throw ParameterMismatch("reports use different zeta targets");

  Comparison out;
  out.tv_distance = tv_distance(a.histogram, b.histogram);
  for (const auto& ra : a.l_moments)
    for (const auto& rb : b.l_moments)
      if (ra.lambda == rb.lambda)
        out.l_moment_gaps.push_back({ra.lambda, ra.estimate.mean, rb.estimate.mean, ra.estimate.mean - rb.estimate.mean});
  for (const auto& ra : a.hom_moments)
    for (const auto& rb : b.hom_moments)
      if (ra.group == rb.group)
        out.hom_moment_gaps.push_back(
            {ra.group, ra.rescaled.mean, rb.rescaled.mean, ra.rescaled.mean - rb.rescaled.mean});
  return out;
}

}  // namespace cokfluct
