#pragma once

// JSON and CSV forms of run configurations and experiment reports.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cokfluct/ensembles.hpp"
#include "cokfluct/experiments.hpp"

namespace cokfluct {

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  int schema_version = kSchemaVersion;
  EnsembleSpec spec;
  std::size_t trials = 100;
  std::vector<Partition> groups = {Partition{1}};
  std::vector<Partition> lambdas = {Partition{1}};
  int d = 3;
  int workers = 0;
  TrialKernel kernel = TrialKernel::kStreaming;
  std::size_t bootstrap_resamples = 1000;
  std::string output_dir = "cokfluct_run";

  bool operator==(const RunConfig&) const = default;
};

nlohmann::json distribution_to_json(const EntryDistribution& d);
EntryDistribution distribution_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json spec_to_json(const EnsembleSpec& spec);
EnsembleSpec spec_from_json(const nlohmann::json& j, const std::string& path = "ensemble");

nlohmann::json config_to_json(const RunConfig& config);
/// Strict: unknown keys, wrong types and invalid values raise ConfigError
/// naming the offending field.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

struct ReportMetadata {
  bool reproducible = false;  ///< omit timestamp and hostname
};

nlohmann::json report_to_json(const ExperimentReport& report, const ReportMetadata& meta = {});
ExperimentReport report_from_json(const nlohmann::json& j);
ExperimentReport load_report(const std::string& path);

// CSV tables. Columns:
//   histogram.csv    c1..cd,count,mass
//   hom_moments.csv  group,mean,ci_low,ci_high,samples,target_exact,target_value
//   l_moments.csv    lambda,mean,ci_low,ci_high,samples,target_exact,target_scale,target_value
void write_histogram_csv(const ExperimentReport& report, std::ostream& out);
void write_hom_moments_csv(const ExperimentReport& report, std::ostream& out);
void write_l_moments_csv(const ExperimentReport& report, std::ostream& out);

/// Writes config.json, report.json and the three CSV tables into dir.
void write_run_directory(const std::string& dir, const RunConfig& config, const ExperimentReport& report,
                         const ReportMetadata& meta);

}  // namespace cokfluct
