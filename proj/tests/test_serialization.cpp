#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cokfluct/errors.hpp"
#include "cokfluct/serialization.hpp"

using namespace cokfluct;
using nlohmann::json;

namespace {

json minimal_config() {
  return json::parse(R"({
    "schema_version": 1,
    "ensemble": {"kind": "block_triangular", "p": 2, "k": 3, "n": 2,
                 "a_dist": {"type": "uniform_range", "a": -5, "b": 5},
                 "b_dist": {"type": "constant", "value": 0},
                 "seed": 12},
    "trials": 20
  })");
}

std::string config_error(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("distribution round trip") {
  const std::vector<EntryDistribution> dists = {
      EntryDistribution::uniform_mod(7),
      EntryDistribution::bernoulli(mpq_class(3, 10)),
      EntryDistribution::uniform_range(-100, 100),
      EntryDistribution::constant(1),
      EntryDistribution::finite_support({{-2, mpq_class(1, 3)}, {5, mpq_class(2, 3)}}),
  };
  for (const auto& d : dists) CHECK(distribution_from_json(distribution_to_json(d), "x") == d);
  CHECK(distribution_from_json(json::parse(R"({"type": "bernoulli", "q": 0.3})"), "x") ==
        EntryDistribution::bernoulli(mpq_class(3, 10)));
  CHECK(distribution_from_json(json::parse(R"({"type": "bernoulli", "q": "1/4"})"), "x") ==
        EntryDistribution::bernoulli(mpq_class(1, 4)));
}

TEST_CASE("config round trip") {
  RunConfig c = config_from_json(minimal_config());
  CHECK(c.trials == 20);
  CHECK(c.d == 3);
  CHECK(c.spec.k == 3);
  CHECK(c.spec.b_dist == EntryDistribution::constant(0));
  c.groups = {Partition{1}, Partition{2, 1}};
  c.lambdas = {Partition{1, 1}};
  c.spec.zeta = 0.25;
  c.spec.block_sizes = {1, 2, 3};
  c.kernel = TrialKernel::kDense;
  c.workers = 3;
  CHECK(config_from_json(config_to_json(c)) == c);

  auto product = minimal_config();
  product["ensemble"]["kind"] = "matrix_product";
  product["ensemble"].erase("b_dist");
  product["groups"] = json::array({"(1)", json::array({2, 1})});
  const auto pc = config_from_json(product);
  CHECK(pc.spec.kind == EnsembleKind::kMatrixProduct);
  CHECK(pc.groups[1] == Partition{2, 1});
}

TEST_CASE("strict config parsing") {
  auto j = minimal_config();
  j["ensemble"]["colour"] = "red";
  CHECK(config_error(j).find("ensemble.colour") != std::string::npos);

  j = minimal_config();
  j["trails"] = 5;
  CHECK(config_error(j).find("trails") != std::string::npos);

  j = minimal_config();
  j["ensemble"]["a_dist"] = json::parse(R"({"type": "constant", "value": 1})");
  const auto msg = config_error(j);
  CHECK(msg.find("A.3") != std::string::npos);
  CHECK(msg.find("balanced") != std::string::npos);

  j = minimal_config();
  j["ensemble"]["p"] = 4;
  CHECK_FALSE(config_error(j).empty());

  j = minimal_config();
  j["schema_version"] = 2;
  CHECK(config_error(j).find("schema_version") != std::string::npos);

  j = minimal_config();
  j["trials"] = "many";
  CHECK(config_error(j).find("trials") != std::string::npos);

  j = minimal_config();
  j["lambdas"] = json::array({"(1,1,1,1)"});
  CHECK_FALSE(config_error(j).empty());

  j = minimal_config();
  j["ensemble"]["a_dist"]["type"] = "gaussian";
  CHECK(config_error(j).find("ensemble.a_dist") != std::string::npos);

  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("report round trip") {
  const RunConfig c = config_from_json(minimal_config());
  const auto report = run_experiment(c.spec, c.trials, {Partition{1}, Partition{1, 1}}, {Partition{1}}, 2, {1});
  const json j = report_to_json(report, ReportMetadata{true});
  CHECK_FALSE(j.contains("timestamp"));
  CHECK_FALSE(j.contains("hostname"));
  CHECK(report_to_json(report).contains("timestamp"));
  const auto back = report_from_json(j);
  CHECK(report_to_json(back, ReportMetadata{true}) == j);
  CHECK(back.records == report.records);
  CHECK(back.spec == report.spec);
}

TEST_CASE("run directory") {
  const RunConfig c = config_from_json(minimal_config());
  const auto report = run_experiment(c.spec, c.trials, c.groups, c.lambdas, c.d, {1});
  const auto dir = std::filesystem::temp_directory_path() / "cokfluct_test_run";
  std::filesystem::remove_all(dir);
  write_run_directory(dir.string(), c, report, ReportMetadata{true});
  for (const char* name : {"config.json", "report.json", "histogram.csv", "hom_moments.csv", "l_moments.csv"})
    CHECK(std::filesystem::exists(dir / name));
  CHECK(load_config((dir / "config.json").string()) == c);

  std::ifstream hist(dir / "histogram.csv");
  std::string header;
  std::getline(hist, header);
  CHECK(header == "c1,c2,c3,count,mass");
  std::size_t rows = 0;
  for (std::string line; std::getline(hist, line);) rows += !line.empty();
  CHECK(rows == report.histogram.size());

  std::ostringstream hom;
  write_hom_moments_csv(report, hom);
  CHECK(hom.str().rfind("group,mean,ci_low,ci_high,samples,target_exact,target_value\n", 0) == 0);
  std::filesystem::remove_all(dir);
}
