#include <climits>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <bfv/bfv.hpp>

namespace {

struct GlobalFlags {
  std::optional<double> mu;
  std::optional<int> max_iter;
  std::optional<double> tol;
  bool quiet = false;
};

void apply_overrides(const GlobalFlags& g, bfv::Scenario& scenario) {
  if (g.mu) scenario.solver.mu = *g.mu;
  if (g.max_iter) scenario.solver.max_iter = *g.max_iter;
  if (g.tol) scenario.solver.tol = *g.tol;
}

void info(const GlobalFlags& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << '\n';
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bfv::ParseError("cannot open output file: " + path);
  out << content;
  if (!out) throw bfv::ParseError("failed writing output file: " + path);
}

bfv::ordered_json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bfv::ParseError("cannot open file: " + path);
  try {
    return bfv::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw bfv::ParseError(path + ": " + e.what());
  }
}

int cmd_solve(const GlobalFlags& g, const std::string& scenario_path,
              const std::string& placement_out) {
  bfv::Scenario scenario = bfv::load_scenario(scenario_path);
  apply_overrides(g, scenario);
  const bfv::WorkloadPlan plan = bfv::build_workload(scenario.instance);
  bfv::MmResult solved = bfv::mm_solve(scenario.instance, plan,
                                       bfv::solver_options(scenario.solver));
  const bfv::EvaluationReport report =
      bfv::evaluate(solved.placement, scenario.instance, plan);

  bfv::ordered_json out;
  out["report"] = bfv::report_to_json(report);
  out["solver"] = bfv::trace_to_json(solved.trace);
  out["placement"] = bfv::placement_to_json(solved.placement, plan);
  std::cout << out.dump(2) << '\n';

  if (!placement_out.empty())
    write_file(placement_out,
               bfv::placement_to_json(solved.placement, plan).dump(2) + "\n");

  std::string status = solved.trace.termination == bfv::MmTermination::Converged
                           ? "converged"
                           : "hit the iteration cap";
  if (solved.trace.c1_relaxed) status += " with the latency constraint relaxed";
  info(g, "placed " + std::to_string(plan.demand_count()) + " functions on " +
              std::to_string(scenario.instance.graph.servers.size()) +
              " servers in " +
              std::to_string(solved.trace.iterations.size()) +
              " iterations (" + status + ")");
  return 0;
}

int cmd_evaluate(const GlobalFlags& g, const std::string& scenario_path,
                 const std::string& placement_path) {
  bfv::Scenario scenario = bfv::load_scenario(scenario_path);
  apply_overrides(g, scenario);
  const bfv::WorkloadPlan plan = bfv::build_workload(scenario.instance);
  const bfv::Placement placement =
      bfv::placement_from_json(load_json(placement_path), plan);
  const bfv::EvaluationReport report =
      bfv::evaluate(placement, scenario.instance, plan);
  std::cout << bfv::report_to_json(report).dump(2) << '\n';
  info(g, report.feasible ? "placement is feasible"
                          : "placement violates constraints");
  return 0;
}

int cmd_sweep(const GlobalFlags& g, const std::string& scenario_path,
              const std::string& out_path) {
  bfv::Scenario scenario = bfv::load_scenario(scenario_path);
  apply_overrides(g, scenario);
  const std::vector<bfv::SweepRow> rows = bfv::run_sweep(scenario);
  write_file(out_path, bfv::sweep_to_csv(rows));
  info(g, "wrote " + std::to_string(rows.size()) + " rows to " + out_path);
  return 0;
}

int cmd_compare(const GlobalFlags& g, const std::string& scenario_path) {
  bfv::Scenario scenario = bfv::load_scenario(scenario_path);
  apply_overrides(g, scenario);
  const bfv::CompareReport report = bfv::compare(scenario);
  std::cout << bfv::compare_to_json(report).dump(2) << '\n';
  info(g, "baseline minus bfv total energy: " +
              bfv::format_double(report.baseline.report.e_total_j -
                                 report.bfv.e_total_j) +
              " J");
  return 0;
}

int cmd_validate(const GlobalFlags& g, const std::string& scenario_path,
                 std::int64_t trials, std::uint64_t seed, int partitions) {
  bfv::Scenario scenario = bfv::load_scenario(scenario_path);
  apply_overrides(g, scenario);
  bfv::McConfig mc;
  mc.trials = trials;
  mc.seed = seed;
  mc.partitions = partitions;
  const bfv::CrossCheckReport report = bfv::cross_check(scenario.instance, mc);
  for (const auto& e : report.entries)
    std::cout << e.quantity << " analytic=" << bfv::format_double(e.analytic)
              << " empirical=" << bfv::format_double(e.empirical)
              << " bound=" << bfv::format_double(e.bound) << ' '
              << (e.pass ? "PASS" : "FAIL") << '\n';
  std::cout << "cross-check " << (report.pass ? "PASS" : "FAIL") << " ("
            << report.entries.size() << " quantities, " << trials
            << " trials, seed " << seed << ", partitions " << partitions
            << ")\n";
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blockchain function-chain placement and evaluation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  double mu = 0.0;
  int max_iter = 0;
  double tol = 0.0;
  auto* mu_opt = app.add_option("--mu", mu, "Integrality penalty weight")
                     ->check(CLI::PositiveNumber);
  auto* iter_opt =
      app.add_option("--max-iter", max_iter, "Solver iteration cap")
          ->check(CLI::Range(1, INT_MAX));
  auto* tol_opt = app.add_option("--tol", tol, "Solver convergence tolerance")
                      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", flags.quiet, "Suppress informational messages");

  std::string scenario_path, placement_path, placement_out, out_path;
  std::int64_t trials = 1'000'000;
  std::uint64_t seed = 0;
  int partitions = 1;

  auto* solve = app.add_subcommand("solve", "Solve the placement problem");
  solve->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required();
  solve->add_option("--placement-out", placement_out,
                    "Write the placement to this JSON file");

  auto* evaluate =
      app.add_subcommand("evaluate", "Evaluate a placement against a scenario");
  evaluate->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required();
  evaluate->add_option("placement", placement_path, "Placement JSON file")
      ->required();

  auto* sweep =
      app.add_subcommand("sweep", "Sweep a parameter grid and emit CSV");
  sweep->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required();
  sweep->add_option("--out", out_path, "Output CSV path")->required();

  auto* compare = app.add_subcommand(
      "compare", "Compare placement against the mining-only baseline");
  compare->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required();

  auto* validate = app.add_subcommand(
      "validate", "Cross-check analytic quantities by Monte Carlo");
  validate->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required();
  validate->add_option("--trials", trials, "Monte Carlo trials")
      ->check(CLI::Range(std::int64_t{1}, std::int64_t{1} << 40));
  validate->add_option("--seed", seed, "Root RNG seed");
  validate->add_option("--partitions", partitions, "Independent RNG streams")
      ->check(CLI::Range(1, INT_MAX));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  if (mu_opt->count()) flags.mu = mu;
  if (iter_opt->count()) flags.max_iter = max_iter;
  if (tol_opt->count()) flags.tol = tol;

  try {
    if (app.got_subcommand(solve))
      return cmd_solve(flags, scenario_path, placement_out);
    if (app.got_subcommand(evaluate))
      return cmd_evaluate(flags, scenario_path, placement_path);
    if (app.got_subcommand(sweep))
      return cmd_sweep(flags, scenario_path, out_path);
    if (app.got_subcommand(compare)) return cmd_compare(flags, scenario_path);
    if (app.got_subcommand(validate))
      return cmd_validate(flags, scenario_path, trials, seed, partitions);
  } catch (const bfv::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const bfv::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const bfv::InfeasibleError& e) {
    std::cerr << "error: infeasible: " << e.what() << '\n';
    return 2;
  } catch (const bfv::SearchSpaceTooLargeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bfv::RepairFailedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bfv::AllInfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 3;
}
