#include <doctest.h>

#include <algorithm>
#include <random>

#include "cokfluct/errors.hpp"
#include "cokfluct/experiments.hpp"
#include "cokfluct/serialization.hpp"

using namespace cokfluct;

namespace {

EnsembleSpec block_spec(std::size_t k, std::size_t n, std::uint64_t seed) {
  EnsembleSpec spec;
  spec.kind = EnsembleKind::kBlockTriangular;
  spec.p = 2;
  spec.k = k;
  spec.n = n;
  spec.a_dist = EntryDistribution::uniform_range(-3, 3);
  spec.b_dist = EntryDistribution::uniform_range(-100, 100);
  spec.master_seed = seed;
  return spec;
}

std::string dump(const ExperimentReport& r) { return report_to_json(r, ReportMetadata{true}).dump(); }

HistogramBin bin(std::vector<long> v, double mass) { return HistogramBin{CenteredRankVector{std::move(v)}, 1, mass}; }

}  // namespace

TEST_CASE("hom moment of a single trial") {
  CHECK(hom_moment_of_trial(Partition{1}, 0, AbelianPGroup(2, Partition{1})) == 2);
  CHECK(hom_moment_of_trial(Partition{}, 1, AbelianPGroup(2, Partition{1})) == 2);
  CHECK(hom_moment_of_trial(Partition{2, 1}, 0, AbelianPGroup(2, Partition{2})) == 8);
  CHECK(hom_moment_of_trial(Partition{1}, 2, AbelianPGroup(3, Partition{1, 1})) == 9 * 81);
}

TEST_CASE("k = 1, n = 1, uniform {0, 1}: E|Hom(cok, Z/2)| = 3/2") {
  auto spec = block_spec(1, 1, 4);
  spec.a_dist = EntryDistribution::uniform_range(0, 1);
  const auto report = run_experiment(spec, 100000, {Partition{1}}, {}, 1, {1, TrialKernel::kStreaming, 0});
  REQUIRE(report.hom_moments.size() == 1);
  CHECK(std::abs(report.hom_moments[0].rescaled.mean - 1.5) < 0.01);
  CHECK(report.free_rank_count + report.included_count == 100000);
}

TEST_CASE("empty experiment") {
  const auto report = run_experiment(block_spec(3, 2, 1), 0, {Partition{1}}, {Partition{1}}, 2);
  CHECK(report.trial_count == 0);
  CHECK(report.included_count == 0);
  CHECK(report.excluded_count() == 0);
  CHECK(report.records.empty());
  CHECK(report.histogram.empty());
}

TEST_CASE("reports do not depend on the worker count or on record order") {
  const auto spec = block_spec(6, 3, 11);
  const std::vector<Partition> groups = {Partition{1}, Partition{1, 1}};
  const std::vector<Partition> lambdas = {Partition{1}, Partition{2, 1}};
  const auto serial = run_experiment(spec, 300, groups, lambdas, 3, {1});
  const auto parallel = run_experiment(spec, 300, groups, lambdas, 3, {4});
  CHECK(dump(serial) == dump(parallel));
  CHECK(dump(serial) == dump(run_experiment(spec, 300, groups, lambdas, 3, {1})));

  auto shuffled = serial.records;
  std::mt19937 gen(5);
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  CHECK(dump(aggregate(spec, shuffled, groups, lambdas, 3)) == dump(serial));
}

TEST_CASE("report bookkeeping") {
  auto spec = block_spec(5, 2, 12);
  spec.a_dist = EntryDistribution::uniform_range(0, 1);  // singular blocks are common
  const auto report = run_experiment(spec, 500, {Partition{1}}, {Partition{1}}, 2, {1});
  CHECK(report.records.size() == 500);
  CHECK(report.included_count + report.free_rank_count + report.saturated_count == 500);
  CHECK(report.free_rank_count > 0);
  std::size_t counted = 0;
  double mass = 0;
  for (const auto& b : report.histogram) {
    counted += b.count;
    mass += b.mass;
  }
  CHECK(counted == report.included_count);
  CHECK(mass == doctest::Approx(1.0));
  for (std::size_t i = 0; i < report.records.size(); ++i) CHECK(report.records[i].trial == i);
  const auto& row = report.hom_moments[0].rescaled;
  CHECK(row.ci_low <= row.mean);
  CHECK(row.mean <= row.ci_high);
  CHECK(report.l_moments[0].estimate.samples == report.included_count);
}

TEST_CASE("streaming and dense kernels produce identical records") {
  for (std::size_t k : {1, 2, 5, 9}) {
    auto spec = block_spec(k, 3, 100 + k);
    spec.block_sizes.clear();
    if (k == 5) spec.block_sizes = {1, 4, 2, 3, 1};
    if (k == 9) spec.b_dist = EntryDistribution::constant(0);
    for (std::uint64_t t = 0; t < 40; ++t)
      CHECK(run_trial(spec, t, TrialKernel::kStreaming) == run_trial(spec, t, TrialKernel::kDense));
  }
}

TEST_CASE("product and bidiagonal ensembles give the same cokernel") {
  EnsembleSpec spec;
  spec.kind = EnsembleKind::kMatrixProduct;
  spec.p = 3;
  spec.k = 4;
  spec.n = 3;
  spec.a_dist = EntryDistribution::uniform_range(-2, 2);
  spec.master_seed = 9;
  auto embedded = spec;
  embedded.kind = EnsembleKind::kBidiagonalEmbedding;
  for (std::uint64_t t = 0; t < 60; ++t) {
    const auto a = run_trial(spec, t), b = run_trial(embedded, t);
    CHECK(a.partition == b.partition);
    CHECK(a.free_rank == b.free_rank);
  }
}

TEST_CASE("precision escalation resolves small singular trials") {
  auto spec = block_spec(4, 1, 13);
  spec.a_dist = EntryDistribution::uniform_range(0, 1);
  spec.b_dist = EntryDistribution::constant(0);
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto r = run_trial(spec, t);
    CHECK(r.saturated_count == 0);
    CHECK(r.precision_used >= 16);
  }
}

TEST_CASE("B does not move the Hom moments") {
  const std::vector<EntryDistribution> bs = {EntryDistribution::constant(0),
                                             EntryDistribution::uniform_range(-100, 100),
                                             EntryDistribution::constant(1)};
  std::vector<Estimate> est;
  for (const auto& b : bs) {
    auto spec = block_spec(8, 12, 21);
    spec.a_dist = EntryDistribution::uniform_range(-100, 100);
    spec.b_dist = b;
    est.push_back(run_experiment(spec, 600, {Partition{1}}, {}, 1, {1}).hom_moments[0].rescaled);
  }
  for (std::size_t i = 0; i < est.size(); ++i)
    for (std::size_t j = i + 1; j < est.size(); ++j)
      CHECK((est[i].ci_low <= est[j].ci_high && est[j].ci_low <= est[i].ci_high));
}

TEST_CASE("a single product factor has the classical moment") {
  EnsembleSpec spec;
  spec.kind = EnsembleKind::kMatrixProduct;
  spec.p = 2;
  spec.k = 1;
  spec.n = 24;
  spec.a_dist = EntryDistribution::uniform_range(-100, 100);
  spec.master_seed = 22;
  const auto report = run_experiment(spec, 10000, {Partition{1}}, {}, 1, {1, TrialKernel::kStreaming, 0});
  CHECK(std::abs(report.hom_moments[0].rescaled.mean - 2.0) <= 0.1);
}

TEST_CASE("total variation distance") {
  const std::vector<HistogramBin> a = {bin({0}, 0.5), bin({1}, 0.5)};
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance({bin({0}, 1.0)}, {bin({1}, 1.0)}) == 1.0);
  CHECK(tv_distance(a, {bin({1}, 1.0)}) == doctest::Approx(0.5));
}

TEST_CASE("comparing reports") {
  const auto spec = block_spec(4, 3, 31);
  const auto report = run_experiment(spec, 200, {Partition{1}}, {Partition{1}}, 2, {1});
  const auto self = compare_ensembles(report, report);
  CHECK(self.tv_distance == 0.0);
  REQUIRE(self.l_moment_gaps.size() == 1);
  CHECK(self.l_moment_gaps[0].gap == 0.0);

  auto other = report;
  other.d = 3;
  CHECK_THROWS_AS(compare_ensembles(report, other), ParameterMismatch);
  other = report;
  other.zeta = 0.5;
  CHECK_THROWS_AS(compare_ensembles(report, other), ParameterMismatch);
  other = report;
  other.spec.p = 3;
  CHECK_THROWS_AS(compare_ensembles(report, other), ParameterMismatch);
}
