#include "cokfluct/serialization.hpp"

#include <unistd.h>

#include <cctype>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include "cokfluct/errors.hpp"

namespace cokfluct {

using nlohmann::json;

namespace {

// Object reader that remembers which keys were consumed so leftovers can be
// reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  /// Marks the key as known; null counts as absent.
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where(key) + ": missing required field");
    return j_.at(key);
  }

  template <class T>
  T require(const std::string& key) {
    const json& v = raw(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + ": wrong type (got " + v.dump() + ")");
    }
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    return require<T>(key);
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(where(k) + ": unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

mpq_class parse_rational(const std::string& text, const std::string& where) {
  try {
    if (text.find('/') != std::string::npos) {
      mpq_class q(text);
      q.canonicalize();
      return q;
    }
    // decimal notation, taken exactly
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';
    std::string digits;
    std::size_t frac = 0;
    bool dot = false;
    for (; i < text.size(); ++i) {
      const char c = text[i];
      if (c == '.' && !dot) {
        dot = true;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        digits += c;
        if (dot) ++frac;
      } else {
        throw std::invalid_argument("bad digit");
      }
    }
    if (digits.empty()) throw std::invalid_argument("empty");
    mpz_class num(digits), den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(frac));
    mpq_class q(negative ? mpz_class(-num) : num, den);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw ConfigError(where + ": '" + text + "' is not a rational number");
  }
}

mpq_class rational_field(const json& v, const std::string& where) {
  if (v.is_string()) return parse_rational(v.get<std::string>(), where);
  if (v.is_number_integer()) return mpq_class(mpz_class(v.dump()));
  if (v.is_number()) return parse_rational(v.dump(), where);
  throw ConfigError(where + ": expected a rational number or a string such as \"3/10\"");
}

Partition partition_field(const json& v, const std::string& where) {
  try {
    if (v.is_string()) return Partition::parse(v.get<std::string>());
    if (v.is_array()) return Partition(v.get<std::vector<int>>());
  } catch (const json::exception&) {
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": expected a partition such as \"(2,1)\"");
}

std::vector<Partition> partition_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected a list of partitions");
  std::vector<Partition> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(partition_field(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::string kernel_name(TrialKernel k) { return k == TrialKernel::kDense ? "dense" : "streaming"; }

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string host_name() {
  char buf[256] = {};
  if (gethostname(buf, sizeof buf - 1) != 0) return "unknown";
  return buf;
}

json estimate_json(const Estimate& e) {
  return {{"mean", e.mean}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high}, {"samples", e.samples}};
}

Estimate estimate_from(const json& j) {
  Estimate e;
  e.mean = j.at("mean").get<double>();
  e.ci_low = j.at("ci_low").get<double>();
  e.ci_high = j.at("ci_high").get<double>();
  e.samples = j.at("samples").get<std::size_t>();
  return e;
}

}  // namespace

json distribution_to_json(const EntryDistribution& d) {
  using K = EntryDistribution::Kind;
  switch (d.kind()) {
    case K::kUniformMod:
      return {{"type", "uniform_mod"}, {"m", d.lo()}};
    case K::kBernoulli:
      return {{"type", "bernoulli"}, {"q", d.bernoulli_q().get_str()}};
    case K::kUniformRange:
      return {{"type", "uniform_range"}, {"a", d.lo()}, {"b", d.hi()}};
    case K::kConstant:
      return {{"type", "constant"}, {"value", d.lo()}};
    case K::kFiniteSupport: {
      json values = json::array();
      for (const auto& [v, w] : d.support()) values.push_back(json::array({v, w.get_str()}));
      return {{"type", "finite_support"}, {"values", values}};
    }
  }
  return {};
}

EntryDistribution distribution_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  const auto type = f.require<std::string>("type");
  EntryDistribution out = EntryDistribution::constant(0);
  try {
    if (type == "uniform_mod") {
      out = EntryDistribution::uniform_mod(f.require<std::int64_t>("m"));
    } else if (type == "bernoulli") {
      out = EntryDistribution::bernoulli(rational_field(f.raw("q"), f.where("q")));
    } else if (type == "uniform_range") {
      const auto a = f.require<std::int64_t>("a");
      out = EntryDistribution::uniform_range(a, f.require<std::int64_t>("b"));
    } else if (type == "constant") {
      out = EntryDistribution::constant(f.require<std::int64_t>("value"));
    } else if (type == "finite_support") {
      const json& values = f.raw("values");
      if (!values.is_array()) throw ConfigError(f.where("values") + ": expected a list of [value, probability]");
      std::vector<std::pair<std::int64_t, mpq_class>> weighted;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const std::string at = f.where("values") + "[" + std::to_string(i) + "]";
        const json& e = values[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer())
          throw ConfigError(at + ": expected [integer value, probability]");
        weighted.emplace_back(e[0].get<std::int64_t>(), rational_field(e[1], at));
      }
      out = EntryDistribution::finite_support(std::move(weighted));
    } else {
      throw ConfigError(f.where("type") + ": unknown distribution '" + type +
                        "' (expected uniform_mod, bernoulli, uniform_range, constant or finite_support)");
    }
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw ConfigError(path + ": " + msg);
  }
  f.finish();
  return out;
}

json spec_to_json(const EnsembleSpec& spec) {
  json j = {{"kind", to_string(spec.kind)},
            {"p", spec.p},
            {"k", spec.k},
            {"n", spec.n},
            {"a_dist", distribution_to_json(spec.a_dist)},
            {"b_dist", distribution_to_json(spec.b_dist)},
            {"seed", spec.master_seed},
            {"precision", spec.precision},
            {"min_epsilon", spec.min_epsilon.get_str()}};
  if (!spec.block_sizes.empty()) j["block_sizes"] = spec.block_sizes;
  if (spec.zeta) j["zeta"] = *spec.zeta;
  return j;
}

EnsembleSpec spec_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  EnsembleSpec s;
  try {
    s.kind = parse_ensemble_kind(f.require<std::string>("kind"));
  } catch (const ConfigError& e) {
    throw ConfigError(f.where("kind") + ": " + e.what());
  }
  s.p = f.require<std::uint64_t>("p");
  s.k = f.require<std::size_t>("k");
  s.n = f.get<std::size_t>("n", s.n);
  s.block_sizes = f.get<std::vector<std::size_t>>("block_sizes", {});
  if (f.has("a_dist")) s.a_dist = distribution_from_json(f.raw("a_dist"), f.where("a_dist"));
  if (f.has("b_dist")) s.b_dist = distribution_from_json(f.raw("b_dist"), f.where("b_dist"));
  s.master_seed = f.get<std::uint64_t>("seed", 0);
  s.precision = f.get<int>("precision", 0);
  if (f.has("zeta")) s.zeta = f.require<double>("zeta");
  if (f.has("min_epsilon")) s.min_epsilon = rational_field(f.raw("min_epsilon"), f.where("min_epsilon"));
  f.finish();
  return s;
}

json config_to_json(const RunConfig& c) {
  json groups = json::array(), lambdas = json::array();
  for (const auto& g : c.groups) groups.push_back(g.to_string());
  for (const auto& l : c.lambdas) lambdas.push_back(l.to_string());
  return {{"schema_version", c.schema_version},
          {"ensemble", spec_to_json(c.spec)},
          {"trials", c.trials},
          {"groups", groups},
          {"lambdas", lambdas},
          {"d", c.d},
          {"workers", c.workers},
          {"kernel", kernel_name(c.kernel)},
          {"bootstrap_resamples", c.bootstrap_resamples},
          {"output_dir", c.output_dir}};
}

RunConfig config_from_json(const json& j) {
  Fields f(j, "config");
  RunConfig c;
  c.schema_version = f.require<int>("schema_version");
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("config.schema_version: unsupported version " + std::to_string(c.schema_version) +
                      " (expected " + std::to_string(kSchemaVersion) + ")");
  c.spec = spec_from_json(f.raw("ensemble"), "config.ensemble");
  c.trials = f.get<std::size_t>("trials", c.trials);
  if (f.has("groups")) c.groups = partition_list(f.raw("groups"), f.where("groups"));
  if (f.has("lambdas")) c.lambdas = partition_list(f.raw("lambdas"), f.where("lambdas"));
  c.d = f.get<int>("d", c.d);
  c.workers = f.get<int>("workers", c.workers);
  const auto kernel = f.get<std::string>("kernel", "streaming");
  if (kernel == "streaming") c.kernel = TrialKernel::kStreaming;
  else if (kernel == "dense") c.kernel = TrialKernel::kDense;
  else throw ConfigError(f.where("kernel") + ": expected \"streaming\" or \"dense\"");
  c.bootstrap_resamples = f.get<std::size_t>("bootstrap_resamples", c.bootstrap_resamples);
  c.output_dir = f.get<std::string>("output_dir", c.output_dir);
  f.finish();

  if (c.d < 1) throw ConfigError("config.d: must be positive");
  for (const auto& l : c.lambdas)
    if (l.length() > static_cast<std::size_t>(c.d))
      throw ConfigError("config.lambdas: " + l.to_string() + " has more than d = " + std::to_string(c.d) + " parts");
  c.spec.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

json report_to_json(const ExperimentReport& r, const ReportMetadata& meta) {
  json hom = json::array();
  for (const auto& row : r.hom_moments) {
    json e = estimate_json(row.rescaled);
    e["group"] = row.group.to_string();
    e["target"] = row.target ? json(row.target->get_str()) : json();
    e["target_value"] = row.target ? json(row.target->get_d()) : json();
    hom.push_back(e);
  }
  json lm = json::array();
  for (const auto& row : r.l_moments) {
    json e = estimate_json(row.estimate);
    e["lambda"] = row.lambda.to_string();
    e["target_exact"] = row.target.exact.get_str();
    e["target_scale"] = row.target.scale;
    e["target_value"] = row.target.value();
    lm.push_back(e);
  }
  json hist = json::array();
  for (const auto& b : r.histogram) hist.push_back({{"vector", b.vector.values}, {"count", b.count}, {"mass", b.mass}});
  json records = json::array();
  for (const auto& t : r.records)
    records.push_back({{"trial", t.trial},
                       {"partition", t.partition.to_string()},
                       {"free_rank", t.free_rank},
                       {"saturated_count", t.saturated_count},
                       {"precision", t.precision_used}});
  json j = {{"schema_version", kSchemaVersion},
            {"generator", kGeneratorName},
            {"master_seed", r.spec.master_seed},
            {"ensemble", spec_to_json(r.spec)},
            {"trial_count", r.trial_count},
            {"d", r.d},
            {"zeta", r.zeta},
            {"center", r.center},
            {"included_count", r.included_count},
            {"excluded_count", r.excluded_count()},
            {"free_rank_count", r.free_rank_count},
            {"saturated_count", r.saturated_count},
            {"hom_moments", hom},
            {"l_moments", lm},
            {"centered_histogram", hist},
            {"warnings", r.warnings},
            {"records", records}};
  if (!meta.reproducible) {
    j["timestamp"] = utc_timestamp();
    j["hostname"] = host_name();
  }
  return j;
}

ExperimentReport report_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion) throw ConfigError("report: unsupported schema version");
    ExperimentReport r;
    r.spec = spec_from_json(j.at("ensemble"), "report.ensemble");
    r.trial_count = j.at("trial_count").get<std::size_t>();
    r.d = j.at("d").get<int>();
    r.zeta = j.at("zeta").get<double>();
    r.center = j.at("center").get<long>();
    r.included_count = j.at("included_count").get<std::size_t>();
    r.free_rank_count = j.at("free_rank_count").get<std::size_t>();
    r.saturated_count = j.at("saturated_count").get<std::size_t>();
    for (const auto& e : j.at("hom_moments")) {
      HomMomentRow row;
      row.group = Partition::parse(e.at("group").get<std::string>());
      row.rescaled = estimate_from(e);
      if (!e.at("target").is_null()) row.target = mpq_class(e.at("target").get<std::string>());
      r.hom_moments.push_back(std::move(row));
    }
    for (const auto& e : j.at("l_moments")) {
      LMomentRow row;
      row.lambda = Partition::parse(e.at("lambda").get<std::string>());
      row.estimate = estimate_from(e);
      row.target.exact = mpq_class(e.at("target_exact").get<std::string>());
      row.target.scale = e.at("target_scale").get<double>();
      r.l_moments.push_back(std::move(row));
    }
    for (const auto& e : j.at("centered_histogram"))
      r.histogram.push_back({CenteredRankVector{e.at("vector").get<std::vector<long>>()}, e.at("count").get<std::size_t>(),
                             e.at("mass").get<double>()});
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& e : j.at("records")) {
      TrialRecord t;
      t.trial = e.at("trial").get<std::uint64_t>();
      t.partition = Partition::parse(e.at("partition").get<std::string>());
      t.free_rank = e.at("free_rank").get<std::size_t>();
      t.saturated_count = e.at("saturated_count").get<std::size_t>();
      t.precision_used = e.at("precision").get<int>();
      r.records.push_back(std::move(t));
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report: malformed (") + e.what() + ")");
  }
}

ExperimentReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open report '" + path + "'");
  try {
    return report_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("report '" + path + "' is not valid JSON: " + e.what());
  }
}

void write_histogram_csv(const ExperimentReport& r, std::ostream& out) {
  for (int i = 1; i <= r.d; ++i) out << "c" << i << ",";
  out << "count,mass\n";
  for (const auto& b : r.histogram) {
    for (long v : b.vector.values) out << v << ",";
    out << b.count << "," << format_double(b.mass) << "\n";
  }
}

void write_hom_moments_csv(const ExperimentReport& r, std::ostream& out) {
  out << "group,mean,ci_low,ci_high,samples,target_exact,target_value\n";
  for (const auto& row : r.hom_moments) {
    out << csv_quote(row.group.to_string()) << "," << format_double(row.rescaled.mean) << ","
        << format_double(row.rescaled.ci_low) << "," << format_double(row.rescaled.ci_high) << ","
        << row.rescaled.samples << ",";
    if (row.target) out << row.target->get_str() << "," << format_double(row.target->get_d());
    else out << ",";
    out << "\n";
  }
}

void write_l_moments_csv(const ExperimentReport& r, std::ostream& out) {
  out << "lambda,mean,ci_low,ci_high,samples,target_exact,target_scale,target_value\n";
  for (const auto& row : r.l_moments)
    out << csv_quote(row.lambda.to_string()) << "," << format_double(row.estimate.mean) << ","
        << format_double(row.estimate.ci_low) << "," << format_double(row.estimate.ci_high) << ","
        << row.estimate.samples << "," << row.target.exact.get_str() << "," << format_double(row.target.scale) << ","
        << format_double(row.target.value()) << "\n";
}

void write_run_directory(const std::string& dir, const RunConfig& config, const ExperimentReport& report,
                         const ReportMetadata& meta) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    return out;
  };
  {
    auto out = open("config.json");
    out << config_to_json(config).dump(2) << "\n";
  }
  {
    auto out = open("report.json");
    out << report_to_json(report, meta).dump(2) << "\n";
  }
  {
    auto out = open("histogram.csv");
    write_histogram_csv(report, out);
  }
  {
    auto out = open("hom_moments.csv");
    write_hom_moments_csv(report, out);
  }
  {
    auto out = open("l_moments.csv");
    write_l_moments_csv(report, out);
  }
}

}  // namespace cokfluct
