// Command-line front end: simulate, verify, theory, compare.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cokfluct/errors.hpp"
#include "cokfluct/experiments.hpp"
#include "cokfluct/oracles.hpp"
#include "cokfluct/serialization.hpp"
#include "cokfluct/theory.hpp"

namespace {

using namespace cokfluct;

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct SimulateArgs {
  std::string config;
  std::string out;
  std::size_t trials = 0;
  bool trials_set = false;
  std::uint64_t seed = 0;
  int workers = -1;
  std::string kernel;
  bool reproducible = false;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

int simulate(const SimulateArgs& args, const CLI::App& cmd) {
  RunConfig config = load_config(args.config);
  if (cmd.count("--trials")) config.trials = args.trials;
  if (cmd.count("--seed")) config.spec.master_seed = args.seed;
  if (cmd.count("--workers")) config.workers = args.workers;
  if (cmd.count("--out")) config.output_dir = args.out;
  if (cmd.count("--kernel")) config.kernel = args.kernel == "dense" ? TrialKernel::kDense : TrialKernel::kStreaming;

  ExperimentOptions options;
  options.workers = config.workers;
  options.kernel = config.kernel;
  options.bootstrap_resamples = config.bootstrap_resamples;
  const ExperimentReport report =
      run_experiment(config.spec, config.trials, config.groups, config.lambdas, config.d, options);
  write_run_directory(config.output_dir, config, report, ReportMetadata{args.reproducible});

  std::cout << to_string(config.spec.kind) << " p=" << config.spec.p << " k=" << config.spec.k
            << " trials=" << report.trial_count << " included=" << report.included_count
            << " free_rank=" << report.free_rank_count << " saturated=" << report.saturated_count << "\n";
  for (const auto& row : report.hom_moments)
    std::cout << "  E|Hom(cok, G_" << row.group.to_string() << ")|/k^l = " << fmt(row.rescaled.mean) << " ["
              << fmt(row.rescaled.ci_low) << ", " << fmt(row.rescaled.ci_high) << "]  limit "
              << (row.target ? row.target->get_str() : std::string("n/a")) << "\n";
  for (const auto& row : report.l_moments)
    std::cout << "  E p^<centered, " << row.lambda.to_string() << "> = " << fmt(row.estimate.mean) << " ["
              << fmt(row.estimate.ci_low) << ", " << fmt(row.estimate.ci_high) << "]  limit "
              << fmt(row.target.value()) << "\n";
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << config.output_dir << "\n";
  return 0;
}

int verify(const std::string& suite, std::uint64_t seed) {
  const auto results = run_verify_suite(suite, std::cout, seed);
  bool ok = true;
  for (const auto& r : results) ok = ok && r.ok();
  std::cout << (ok ? "all checks passed" : "some checks FAILED") << "\n";
  return ok ? 0 : kExitRuntime;
}

int theory(const std::vector<std::string>& groups, const std::vector<std::string>& lambdas, std::uint64_t p,
           double zeta, int d) {
  const FluctuationParams params(p, zeta, d);
  for (const auto& text : groups) {
    const AbelianPGroup g(p, Partition::parse(text));
    const auto lattice = enumerate_subgroups(g);
    const auto counts = chain_counts(lattice);
    std::cout << "G=" << g.lambda().to_string() << " p=" << p << ": l=" << ell(g) << " c=(";
    for (std::size_t i = 0; i < counts.size(); ++i) std::cout << (i ? "," : "") << counts[i].get_str();
    std::cout << ") limit c(G,l)/l! = " << limit_rescaled_hom_moment(g).get_str() << "\n";
  }
  for (const auto& text : lambdas) {
    const Partition lambda = Partition::parse(text);
    const LMoment m = L_moment(lambda, params);
    std::cout << "lambda=" << lambda.to_string() << " p=" << p << " zeta=" << zeta << " d=" << d
              << ": L-moment = " << fmt(m.value()) << " (exact " << m.exact.get_str() << " x scale " << fmt(m.scale)
              << ")\n";
  }
  return 0;
}

int compare(const std::string& a_path, const std::string& b_path) {
  const auto a = load_report(a_path);
  const auto b = load_report(b_path);
  const Comparison c = compare_ensembles(a, b);
  std::cout << "TV distance: " << fmt(c.tv_distance) << "\n";
  for (const auto& gap : c.l_moment_gaps)
    std::cout << "  L-moment " << gap.lambda.to_string() << ": " << fmt(gap.a) << " vs " << fmt(gap.b) << " (gap "
              << fmt(gap.gap) << ")\n";
  for (const auto& gap : c.hom_moment_gaps)
    std::cout << "  Hom-moment G_" << gap.lambda.to_string() << ": " << fmt(gap.a) << " vs " << fmt(gap.b)
              << " (gap " << fmt(gap.gap) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cokernel fluctuations of structured random integer matrices"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "run an experiment from a JSON config");
  simulate_cmd->add_option("--config", sim.config, "config file")->required();
  simulate_cmd->add_option("--out", sim.out, "output directory (overrides output_dir)");
  simulate_cmd->add_option("--trials", sim.trials, "trial count (overrides trials)");
  simulate_cmd->add_option("--seed", sim.seed, "master seed (overrides ensemble.seed)");
  simulate_cmd->add_option("--workers", sim.workers, "worker threads, 0 = default (capped by COKFLUCT_WORKERS)");
  simulate_cmd->add_option("--kernel", sim.kernel, "elimination kernel")->check(CLI::IsMember({"streaming", "dense"}));
  simulate_cmd->add_flag("--reproducible", sim.reproducible, "omit timestamp and hostname from the report");

  std::string suite;
  std::uint64_t verify_seed = 1;
  auto* verify_cmd = app.add_subcommand("verify", "run exact verification suites");
  verify_cmd->add_option("suite", suite, "identity, balanced, cok, chains, decomposition or all")->required();
  verify_cmd->add_option("--seed", verify_seed, "seed for randomized instances");

  std::vector<std::string> groups, lambdas;
  std::uint64_t p = 2;
  double zeta = 0.0;
  int d = 3;
  auto* theory_cmd = app.add_subcommand("theory", "print closed-form targets");
  theory_cmd->add_option("--group", groups, "group as a partition, e.g. \"(1,1)\"");
  theory_cmd->add_option("--lambda", lambdas, "partition for an L-moment, e.g. \"(1)\"");
  theory_cmd->add_option("--p", p, "prime");
  theory_cmd->add_option("--zeta", zeta, "zeta in [0,1)");
  theory_cmd->add_option("--d", d, "number of centered ranks");

  std::string report_a, report_b;
  auto* compare_cmd = app.add_subcommand("compare", "compare two experiment reports");
  compare_cmd->add_option("report_a", report_a, "first report.json")->required();
  compare_cmd->add_option("report_b", report_b, "second report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate_cmd) return simulate(sim, *simulate_cmd);
    if (*verify_cmd) return verify(suite, verify_seed);
    if (*theory_cmd) return theory(groups, lambdas, p, zeta, d);
    if (*compare_cmd) return compare(report_a, report_b);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParameterMismatch& e) {
    std::cerr << "parameter mismatch: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid parameters: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
