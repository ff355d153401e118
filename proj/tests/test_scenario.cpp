#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace bfv;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

ordered_json parse_text(const std::string& text) {
  return ordered_json::parse(text);
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "bfv_scenario_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = temp_dir() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(BFV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

const char* kMicroScenario = R"({
  "servers": [{"id": 1, "capacity_hz": 5e9, "power_w": 125.0}],
  "users": [{"id": 1, "class": "mobile", "is_miner": true}],
  "params": {"t_th_s": 2.0, "n_trans": 500},
  "sweep": {"field": "block_size", "grid": [400, 500]}
})";

}  // namespace

TEST_CASE("an empty scenario is the full default population") {
  const Scenario sc = parse_scenario(parse_text("{}"));
  REQUIRE(sc.instance.graph.servers.size() == 50);
  REQUIRE(sc.instance.users.size() == 50);
  REQUIRE(sc.instance.graph.servers[0].capacity_hz == 5e9);
  REQUIRE(sc.instance.graph.servers[0].power_w == 125.0);

  int iot = 0;
  for (const auto& u : sc.instance.users) {
    REQUIRE(u.is_miner);
    REQUIRE_FALSE(u.is_tx_generator);
    iot += u.device_class == DeviceClass::IoTSensor ? 1 : 0;
  }
  REQUIRE(iot == 16);  // floor of a one-third split
  REQUIRE(sc.instance.users[0].device_class == DeviceClass::IoTSensor);
  REQUIRE(sc.instance.users[49].device_class == DeviceClass::MobileUser);

  REQUIRE(sc.instance.params.t_th_s == 1.0);
  REQUIRE(sc.instance.params.n_trans == 5000);
  REQUIRE(sc.instance.costs.mining_cycles == 0.25e9);
  REQUIRE_FALSE(sc.sweep.has_value());
  REQUIRE_FALSE(sc.solver.mu.has_value());
}

TEST_CASE("partial scenarios inherit every other default") {
  const Scenario sc = parse_scenario(parse_text(R"({"users": {"count": 10}})"));
  REQUIRE(sc.instance.graph.servers.size() == 50);
  REQUIRE(sc.instance.users.size() == 10);
  REQUIRE(sc.instance.users[2].device_class == DeviceClass::IoTSensor);
  REQUIRE(sc.instance.users[3].device_class == DeviceClass::MobileUser);
}

TEST_CASE("unknown fields are rejected with their path") {
  REQUIRE_THROWS_WITH(parse_scenario(parse_text(R"({"bogus": 1})")),
                      ContainsSubstring("scenario.bogus"));
  REQUIRE_THROWS_WITH(
      parse_scenario(parse_text(R"({"params": {"bogus": 1}})")),
      ContainsSubstring("params.bogus"));
  REQUIRE_THROWS_WITH(
      parse_scenario(parse_text(R"({"servers": [{"id": 1, "x": 2}]})")),
      ContainsSubstring("servers[0].x"));
}

TEST_CASE("type errors name the offending field") {
  REQUIRE_THROWS_WITH(
      parse_scenario(parse_text(R"({"params": {"t_th_s": "fast"}})")),
      ContainsSubstring("params.t_th_s"));
  REQUIRE_THROWS_WITH(
      parse_scenario(parse_text(R"({"params": {"n_trans": 2.5}})")),
      ContainsSubstring("params.n_trans"));
  REQUIRE_THROWS_AS(
      parse_scenario(parse_text(R"({"users": [{"id": 1, "class": "tablet"}]})")),
      ParseError);
}

TEST_CASE("semantic violations surface as aggregated validation errors") {
  try {
    parse_scenario(parse_text(
        R"({"servers": [{"id": 1, "capacity_hz": -1.0}],
            "users": [{"id": 1, "is_miner": false, "is_tx_generator": false}]})"));
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    bool nonpositive = false, missing_role = false, no_miners = false;
    for (const auto& issue : e.issues) {
      nonpositive |= issue.code == ValidationCode::NonPositiveQuantity;
      missing_role |= issue.code == ValidationCode::MissingRole;
      no_miners |= issue.code == ValidationCode::NoMiners;
    }
    REQUIRE(nonpositive);
    REQUIRE(missing_role);
    REQUIRE(no_miners);
  }
}

TEST_CASE("explicit server lists fill in per-field defaults") {
  const Scenario sc =
      parse_scenario(parse_text(R"({"servers": [{"id": 3}]})"));
  REQUIRE(sc.instance.graph.servers.size() == 1);
  REQUIRE(sc.instance.graph.servers[0].id == 3);
  REQUIRE(sc.instance.graph.servers[0].capacity_hz == 5e9);
  REQUIRE(sc.instance.graph.servers[0].power_w == 125.0);
}

TEST_CASE("generator forms synthesize populations") {
  const Scenario sc = parse_scenario(parse_text(
      R"({"servers": {"count": 4, "capacity_hz": 1e9},
          "users": {"count": 6, "iot_fraction": 0.5, "is_tx_generator": true}})"));
  REQUIRE(sc.instance.graph.servers.size() == 4);
  REQUIRE(sc.instance.graph.servers[3].id == 4);
  REQUIRE(sc.instance.graph.servers[2].capacity_hz == 1e9);
  REQUIRE(sc.instance.users.size() == 6);
  int iot = 0;
  for (const auto& u : sc.instance.users) {
    iot += u.device_class == DeviceClass::IoTSensor ? 1 : 0;
    REQUIRE(u.is_tx_generator);
  }
  REQUIRE(iot == 3);
}

TEST_CASE("user records override class defaults field by field") {
  const Scenario sc = parse_scenario(parse_text(
      R"({"users": [{"id": 9, "class": "iot", "uplink_rate_bps": 5e6}]})"));
  const auto& u = sc.instance.users[0];
  REQUIRE(u.device_class == DeviceClass::IoTSensor);
  REQUIRE(u.local_capacity_hz == 1e7);
  REQUIRE(u.local_power_w == 0.5);
  REQUIRE(u.uplink_rate_bps == 5e6);
  REQUIRE(u.is_miner);
}

TEST_CASE("links are parsed and validated against the graph") {
  const Scenario sc = parse_scenario(parse_text(
      R"({"servers": [{"id": 1}, {"id": 2}],
          "links": [{"src": 1, "dst": 2, "delay_s": 0.01}]})"));
  REQUIRE(sc.instance.graph.links.size() == 1);
  REQUIRE(sc.instance.graph.links[0].delay_s == 0.01);

  REQUIRE_THROWS_AS(parse_scenario(parse_text(
                        R"({"servers": [{"id": 1}, {"id": 2}],
                            "links": [{"src": 1, "dst": 5}]})")),
                    ValidationError);
  REQUIRE_THROWS_AS(
      parse_scenario(parse_text(R"({"links": [{"src": 1}]})")), ParseError);
}

TEST_CASE("solver settings are range-checked") {
  const Scenario sc = parse_scenario(
      parse_text(R"({"solver": {"mu": 5.0, "max_iter": 3, "tol": 1e-4}})"));
  REQUIRE(sc.solver.mu.has_value());
  REQUIRE(*sc.solver.mu == 5.0);
  REQUIRE(sc.solver.max_iter == 3);
  REQUIRE(sc.solver.tol == 1e-4);

  REQUIRE_THROWS_AS(parse_scenario(parse_text(R"({"solver": {"mu": -1.0}})")),
                    ParseError);
  REQUIRE_THROWS_AS(parse_scenario(parse_text(R"({"solver": {"mu": 0.0}})")),
                    ParseError);
  REQUIRE_THROWS_AS(
      parse_scenario(parse_text(R"({"solver": {"max_iter": 0}})")),
      ParseError);
  REQUIRE_THROWS_AS(parse_scenario(parse_text(R"({"solver": {"tol": 0.0}})")),
                    ParseError);
}

TEST_CASE("sweep specifications are strict") {
  const Scenario sc = parse_scenario(parse_text(
      R"({"sweep": {"field": "server_capacity", "grid": [1e9, 2e9]}})"));
  REQUIRE(sc.sweep.has_value());
  REQUIRE(sc.sweep->field == SweepField::ServerCapacity);
  REQUIRE(sc.sweep->grid == std::vector<double>{1e9, 2e9});

  REQUIRE_THROWS_AS(parse_scenario(parse_text(
                        R"({"sweep": {"field": "voltage", "grid": [1]}})")),
                    ParseError);
  REQUIRE_THROWS_AS(
      parse_scenario(parse_text(
          R"({"sweep": {"field": "block_size", "grid": [5, 5]}})")),
      ParseError);
  REQUIRE_THROWS_AS(parse_scenario(parse_text(
                        R"({"sweep": {"field": "block_size", "grid": []}})")),
                    ParseError);
  REQUIRE_THROWS_AS(
      parse_scenario(parse_text(R"({"sweep": {"field": "block_size"}})")),
      ParseError);
}

TEST_CASE("scenario files load or fail with parse errors") {
  REQUIRE_THROWS_AS(load_scenario("/nonexistent/path.json"), ParseError);
  const auto bad = write_temp("bad.json", "{ not json");
  REQUIRE_THROWS_AS(load_scenario(bad), ParseError);
  const auto good = write_temp("good.json", kMicroScenario);
  const Scenario sc = load_scenario(good);
  REQUIRE(sc.instance.params.n_trans == 500);
}

TEST_CASE("per-point instances rebuild the swept field") {
  const Scenario sc = parse_scenario(parse_text("{}"));
  const Instance caps =
      instance_at(sc.instance, SweepField::ServerCapacity, 2e9);
  for (const auto& s : caps.graph.servers) REQUIRE(s.capacity_hz == 2e9);

  const Instance block = instance_at(sc.instance, SweepField::BlockSize, 800);
  REQUIRE(block.params.n_trans == 800);

  const Instance miners = instance_at(sc.instance, SweepField::MinerCount, 9);
  REQUIRE(miners.users.size() == 9);
  REQUIRE(miners.users[2].device_class == DeviceClass::IoTSensor);

  const Instance interval =
      instance_at(sc.instance, SweepField::BlockInterval, 2.5);
  REQUIRE(interval.params.t_th_s == 2.5);
}

TEST_CASE("sweeps emit two deterministic rows per grid point") {
  const Scenario sc = parse_scenario(parse_text(kMicroScenario));
  const auto rows = run_sweep(sc);
  REQUIRE(rows.size() == 4);
  REQUIRE(rows[0].framework == "bfv");
  REQUIRE(rows[1].framework == "baseline");
  REQUIRE(rows[0].sweep_value == 400.0);
  REQUIRE(rows[2].sweep_value == 500.0);
  for (const auto& row : rows) {
    REQUIRE(row.sweep_field == "block_size");
    REQUIRE(row.has_report);
  }

  const std::string csv = sweep_to_csv(rows);
  REQUIRE(csv == sweep_to_csv(run_sweep(sc)));
  REQUIRE_THAT(csv, ContainsSubstring(
      "sweep_field,sweep_value,framework,feasible,e_ran_j,e_mec_j,e_total_j,"
      "t_ran_s,t_mec_s,p_orphan,avg_p_mining,avg_r_mining,sum_r_mining,"
      "confirmation_rate_tps,objective,solver_iters,solver_status\n"));

  REQUIRE_THROWS_AS(run_sweep(parse_scenario(parse_text("{}"))),
                    ValidationError);
}

TEST_CASE("solver failures become flagged rows, not dropped ones") {
  const Scenario sc = parse_scenario(parse_text(R"({
    "servers": [{"id": 1}],
    "users": [{"id": 1}],
    "params": {"t_th_s": 2.0},
    "sweep": {"field": "block_size", "grid": [500, 10000000]}
  })"));
  const auto rows = run_sweep(sc);
  REQUIRE(rows.size() == 4);
  REQUIRE(rows[2].framework == "bfv");
  REQUIRE_FALSE(rows[2].has_report);
  REQUIRE(rows[2].solver_status == "error:infeasible");

  const std::string csv = sweep_to_csv(rows);
  REQUIRE_THAT(csv, ContainsSubstring(",false,,,,,,,,,,,,0,error:infeasible"));
}

TEST_CASE("miner-count sweeps regenerate the population") {
  const Scenario sc = parse_scenario(parse_text(R"({
    "servers": {"count": 3},
    "params": {"t_th_s": 2.0, "n_trans": 500},
    "sweep": {"field": "miner_count", "grid": [2, 3]}
  })"));
  const auto rows = run_sweep(sc);
  REQUIRE(rows[0].report.p_mining.size() == 2);
  REQUIRE(rows[2].report.p_mining.size() == 3);
}

TEST_CASE("numbers are serialized via shortest round-trip form") {
  REQUIRE(format_double(0.1) == "0.1");
  REQUIRE(format_double(1.0) == "1");
  for (double v : {0.1, 2.5e-8, 1.0 / 3.0, 12345.6789, 1e9}) {
    REQUIRE(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("placements round-trip through JSON") {
  const Scenario sc = parse_scenario(parse_text(kMicroScenario));
  const auto plan = build_workload(sc.instance);
  const auto solved = mm_solve(sc.instance, plan, solver_options(sc.solver));

  const ordered_json j = placement_to_json(solved.placement, plan);
  const Placement restored = placement_from_json(j, plan);
  REQUIRE(restored.server_ids == solved.placement.server_ids);

  ordered_json missing = j;
  missing["assignments"].erase(0);
  REQUIRE_THROWS_AS(placement_from_json(missing, plan), ParseError);

  ordered_json extra = j;
  extra["assignments"].push_back(
      {{"user_id", 999}, {"function_index", 0}, {"server_id", 1}});
  REQUIRE_THROWS_AS(placement_from_json(extra, plan), ParseError);

  ordered_json dup = j;
  dup["assignments"].push_back(dup["assignments"][0]);
  REQUIRE_THROWS_AS(placement_from_json(dup, plan), ParseError);
}

TEST_CASE("comparison report carries both frameworks and their deltas") {
  const Scenario sc = parse_scenario(parse_text(R"({
    "servers": [{"id": 1}, {"id": 2}],
    "users": {"count": 2, "iot_fraction": 0.0},
    "params": {"t_th_s": 1.0}
  })"));
  const CompareReport rep = compare(sc);
  REQUIRE(rep.bfv.e_total_j < rep.baseline.report.e_total_j);

  const ordered_json j = compare_to_json(rep);
  REQUIRE(j.contains("bfv"));
  REQUIRE(j.contains("baseline"));
  REQUIRE(j["delta"]["e_total_j"].get<double>() > 0.0);

  const ordered_json r = report_to_json(rep.bfv);
  for (const char* key :
       {"feasible", "e_ran_j", "e_mec_j", "e_total_j", "t_ran_s", "t_mec_s",
        "p_orphan", "p_mining", "r_mining", "sum_r_mining",
        "confirmation_rate_tps", "objective", "violations"})
    REQUIRE(r.contains(key));
}

TEST_CASE("command-line interface maps failures to exit codes") {
  const auto scenario_path = write_temp("cli_ok.json", kMicroScenario);
  REQUIRE(run_cli("solve " + scenario_path) == 0);
  REQUIRE(run_cli("compare " + scenario_path + " --quiet") == 0);

  // parse and I/O problems
  REQUIRE(run_cli("solve /no/such/file.json") == 3);
  const auto bad = write_temp("cli_bad.json", "{ nope");
  REQUIRE(run_cli("solve " + bad) == 3);
  REQUIRE(run_cli("definitely-not-a-subcommand") == 3);
  REQUIRE(run_cli("sweep " + scenario_path) == 3);  // --out is required

  // semantic validation failures
  const auto invalid = write_temp(
      "cli_invalid.json", R"({"servers": [{"id": 1, "capacity_hz": -5}]})");
  REQUIRE(run_cli("solve " + invalid) == 1);

  // solver infeasibility
  const auto tiny = write_temp("cli_tiny.json", R"({
    "servers": [{"id": 1, "capacity_hz": 1e6}],
    "users": [{"id": 1}]
  })");
  REQUIRE(run_cli("solve " + tiny) == 2);

  // a full solve-evaluate round trip through placement files
  const auto placement_path = (temp_dir() / "cli_placement.json").string();
  REQUIRE(run_cli("solve " + scenario_path + " --placement-out " +
                  placement_path) == 0);
  REQUIRE(run_cli("evaluate " + scenario_path + " " + placement_path) == 0);

  const auto csv_path = (temp_dir() / "cli_sweep.csv").string();
  REQUIRE(run_cli("sweep " + scenario_path + " --out " + csv_path +
                  " --quiet") == 0);
  REQUIRE_THAT(read_file(csv_path), ContainsSubstring("block_size,400,bfv,"));

  REQUIRE(run_cli("validate " + scenario_path +
                  " --trials 20000 --seed 3 --quiet") == 0);
}
