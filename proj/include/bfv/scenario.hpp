#pragma once

// Scenario ingestion and experiment plumbing: the JSON schema with
// defaults, user/server population generators, parameter sweeps with CSV
// emission, head-to-head framework comparison, and placement round-trips.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bfv/analytics.hpp"
#include "bfv/baseline.hpp"
#include "bfv/domain.hpp"
#include "bfv/placement.hpp"
#include "bfv/workload.hpp"

namespace bfv {

using ordered_json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  std::vector<ValidationIssue> issues;
  explicit ValidationError(std::vector<ValidationIssue> iss)
      : std::runtime_error(join(iss)), issues(std::move(iss)) {}

 private:
  static std::string join(const std::vector<ValidationIssue>& iss) {
    std::string msg = "scenario failed validation:";
    for (const auto& i : iss)
      msg += "\n  [" + std::string(to_string(i.code)) + "] " + i.message;
    return msg;
  }
};

struct SolverSettings {
  std::optional<double> mu;  // absent: solver picks its default
  int max_iter = 100;
  double tol = 1e-5;
};

enum class SweepField { ServerCapacity, BlockSize, MinerCount, BlockInterval };

inline const char* to_string(SweepField f) {
  switch (f) {
    case SweepField::ServerCapacity: return "server_capacity";
    case SweepField::BlockSize: return "block_size";
    case SweepField::MinerCount: return "miner_count";
    case SweepField::BlockInterval: return "block_interval";
  }
  return "unknown";
}

struct SweepSpec {
  SweepField field = SweepField::ServerCapacity;
  std::vector<double> grid;
};

struct Scenario {
  Instance instance;
  SolverSettings solver;
  std::optional<SweepSpec> sweep;
};

// ---------------------------------------------------------------------------
// Default populations

inline std::vector<Server> make_default_servers(int count,
                                                double capacity_hz = 5e9,
                                                double power_w = 125.0) {
  std::vector<Server> servers;
  servers.reserve(count);
  for (int i = 1; i <= count; ++i)
    servers.push_back(Server{i, capacity_hz, power_w});
  return servers;
}

inline UserDevice make_default_user(std::int64_t id, DeviceClass cls,
                                    bool is_miner, bool is_tx_generator) {
  UserDevice u;
  u.id = id;
  u.device_class = cls;
  u.local_capacity_hz = cls == DeviceClass::IoTSensor ? 1e7 : 1e8;
  u.local_power_w = cls == DeviceClass::IoTSensor ? 0.5 : 5.0;
  u.tx_power_w = 0.2;
  u.uplink_rate_bps = 1e7;
  u.is_miner = is_miner;
  u.is_tx_generator = is_tx_generator;
  return u;
}

// IoT sensors first (lowest ids), mobile users after, one-third IoT by
// default.
inline std::vector<UserDevice> make_default_users(
    int count, double iot_fraction = 1.0 / 3.0, bool is_miner = true,
    bool is_tx_generator = false) {
  const int iot = static_cast<int>(std::floor(count * iot_fraction + 1e-9));
  std::vector<UserDevice> users;
  users.reserve(count);
  for (int i = 1; i <= count; ++i)
    users.push_back(make_default_user(
        i, i <= iot ? DeviceClass::IoTSensor : DeviceClass::MobileUser,
        is_miner, is_tx_generator));
  return users;
}

// ---------------------------------------------------------------------------
// JSON parsing

namespace scenario_detail {

[[noreturn]] inline void fail(const std::string& path,
                              const std::string& what) {
  throw ParseError(path + ": " + what);
}

inline void check_keys(const ordered_json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) fail(path + "." + item.key(), "unknown field");
  }
}

inline double as_number(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline std::int64_t as_integer(const ordered_json& j,
                               const std::string& path) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v == std::floor(v) && std::abs(v) < 9e15)
      return static_cast<std::int64_t>(v);
  }
  fail(path, "expected an integer");
}

inline bool as_boolean(const ordered_json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

inline std::string as_string(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

template <typename T, typename Fn>
void maybe(const ordered_json& obj, const std::string& path, const char* key,
           T& out, Fn&& convert) {
  const auto it = obj.find(key);
  if (it != obj.end()) out = convert(*it, path + "." + key);
}

inline BlockchainParams parse_params(const ordered_json& j,
                                     const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  check_keys(j, path,
             {"t_th_s", "z_s_per_tx", "n_trans", "tx_size_bytes", "r_const",
              "r_trans", "header_bytes"});
  BlockchainParams p;
  maybe(j, path, "t_th_s", p.t_th_s, as_number);
  maybe(j, path, "z_s_per_tx", p.z_s_per_tx, as_number);
  maybe(j, path, "n_trans", p.n_trans, as_integer);
  maybe(j, path, "tx_size_bytes", p.tx_size_bytes, as_number);
  maybe(j, path, "r_const", p.r_const, as_number);
  maybe(j, path, "r_trans", p.r_trans, as_number);
  maybe(j, path, "header_bytes", p.header_bytes, as_number);
  return p;
}

inline CostTable parse_costs(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  check_keys(j, path,
             {"sha256_cycles_per_byte", "rsa_cycles", "ecdsa_cycles",
              "block_auth_cycles_per_byte", "merkle_multiplier",
              "mining_cycles", "gossip_energy_j"});
  CostTable c;
  maybe(j, path, "sha256_cycles_per_byte", c.sha256_cycles_per_byte,
        as_number);
  maybe(j, path, "rsa_cycles", c.rsa_cycles, as_number);
  maybe(j, path, "ecdsa_cycles", c.ecdsa_cycles, as_number);
  maybe(j, path, "block_auth_cycles_per_byte", c.block_auth_cycles_per_byte,
        as_number);
  maybe(j, path, "merkle_multiplier", c.merkle_multiplier, as_number);
  maybe(j, path, "mining_cycles", c.mining_cycles, as_number);
  maybe(j, path, "gossip_energy_j", c.gossip_energy_j, as_number);
  return c;
}

inline std::vector<Server> parse_servers(const ordered_json& j,
                                         const std::string& path) {
  if (j.is_object()) {
    check_keys(j, path, {"count", "capacity_hz", "power_w"});
    const auto it = j.find("count");
    if (it == j.end()) fail(path + ".count", "required for generator form");
    const std::int64_t count = as_integer(*it, path + ".count");
    double capacity = 5e9, power = 125.0;
    maybe(j, path, "capacity_hz", capacity, as_number);
    maybe(j, path, "power_w", power, as_number);
    if (count < 1) fail(path + ".count", "must be >= 1");
    return make_default_servers(static_cast<int>(count), capacity, power);
  }
  if (!j.is_array()) fail(path, "expected an array or generator object");
  std::vector<Server> servers;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const auto& e = j[i];
    if (!e.is_object()) fail(p, "expected an object");
    check_keys(e, p, {"id", "capacity_hz", "power_w"});
    const auto it = e.find("id");
    if (it == e.end()) fail(p + ".id", "required");
    Server s;
    s.id = as_integer(*it, p + ".id");
    s.capacity_hz = 5e9;
    s.power_w = 125.0;
    maybe(e, p, "capacity_hz", s.capacity_hz, as_number);
    maybe(e, p, "power_w", s.power_w, as_number);
    servers.push_back(s);
  }
  return servers;
}

inline std::vector<Link> parse_links(const ordered_json& j,
                                     const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<Link> links;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const auto& e = j[i];
    if (!e.is_object()) fail(p, "expected an object");
    check_keys(e, p, {"src", "dst", "delay_s"});
    Link l;
    bool have_src = false, have_dst = false;
    maybe(e, p, "src", l.src, [&](const ordered_json& v, const std::string& q) {
      have_src = true;
      return as_integer(v, q);
    });
    maybe(e, p, "dst", l.dst, [&](const ordered_json& v, const std::string& q) {
      have_dst = true;
      return as_integer(v, q);
    });
    if (!have_src) fail(p + ".src", "required");
    if (!have_dst) fail(p + ".dst", "required");
    maybe(e, p, "delay_s", l.delay_s, as_number);
    links.push_back(l);
  }
  return links;
}

inline DeviceClass parse_device_class(const ordered_json& j,
                                      const std::string& path) {
  const std::string s = as_string(j, path);
  if (s == "iot") return DeviceClass::IoTSensor;
  if (s == "mobile") return DeviceClass::MobileUser;
  fail(path, "expected \"iot\" or \"mobile\"");
}

inline std::vector<UserDevice> parse_users(const ordered_json& j,
                                           const std::string& path) {
  if (j.is_object()) {
    check_keys(j, path,
               {"count", "iot_fraction", "is_miner", "is_tx_generator"});
    const auto it = j.find("count");
    if (it == j.end()) fail(path + ".count", "required for generator form");
    const std::int64_t count = as_integer(*it, path + ".count");
    if (count < 1) fail(path + ".count", "must be >= 1");
    double iot_fraction = 1.0 / 3.0;
    bool is_miner = true, is_tx_generator = false;
    maybe(j, path, "iot_fraction", iot_fraction, as_number);
    maybe(j, path, "is_miner", is_miner, as_boolean);
    maybe(j, path, "is_tx_generator", is_tx_generator, as_boolean);
    if (iot_fraction < 0.0 || iot_fraction > 1.0)
      fail(path + ".iot_fraction", "must be in [0, 1]");
    return make_default_users(static_cast<int>(count), iot_fraction, is_miner,
                              is_tx_generator);
  }
  if (!j.is_array()) fail(path, "expected an array or generator object");
  std::vector<UserDevice> users;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const auto& e = j[i];
    if (!e.is_object()) fail(p, "expected an object");
    check_keys(e, p,
               {"id", "class", "local_capacity_hz", "local_power_w",
                "tx_power_w", "uplink_rate_bps", "is_miner",
                "is_tx_generator"});
    const auto it = e.find("id");
    if (it == e.end()) fail(p + ".id", "required");
    DeviceClass cls = DeviceClass::MobileUser;
    maybe(e, p, "class", cls, parse_device_class);
    UserDevice u = make_default_user(as_integer(*it, p + ".id"), cls,
                                     /*is_miner=*/true,
                                     /*is_tx_generator=*/false);
    maybe(e, p, "local_capacity_hz", u.local_capacity_hz, as_number);
    maybe(e, p, "local_power_w", u.local_power_w, as_number);
    maybe(e, p, "tx_power_w", u.tx_power_w, as_number);
    maybe(e, p, "uplink_rate_bps", u.uplink_rate_bps, as_number);
    maybe(e, p, "is_miner", u.is_miner, as_boolean);
    maybe(e, p, "is_tx_generator", u.is_tx_generator, as_boolean);
    users.push_back(u);
  }
  return users;
}

inline SolverSettings parse_solver(const ordered_json& j,
                                   const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  check_keys(j, path, {"mu", "max_iter", "tol"});
  SolverSettings s;
  if (const auto it = j.find("mu"); it != j.end()) {
    const double mu = as_number(*it, path + ".mu");
    if (!(mu > 0.0)) fail(path + ".mu", "must be > 0");
    s.mu = mu;
  }
  maybe(j, path, "max_iter", s.max_iter, [](const ordered_json& v,
                                            const std::string& q) {
    const std::int64_t n = as_integer(v, q);
    if (n < 1) fail(q, "must be >= 1");
    return static_cast<int>(n);
  });
  maybe(j, path, "tol", s.tol, [](const ordered_json& v,
                                  const std::string& q) {
    const double t = as_number(v, q);
    if (!(t > 0.0)) fail(q, "must be > 0");
    return t;
  });
  return s;
}

inline SweepSpec parse_sweep(const ordered_json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  check_keys(j, path, {"field", "grid"});
  SweepSpec spec;
  const auto fit = j.find("field");
  if (fit == j.end()) fail(path + ".field", "required");
  const std::string field = as_string(*fit, path + ".field");
  if (field == "server_capacity")
    spec.field = SweepField::ServerCapacity;
  else if (field == "block_size")
    spec.field = SweepField::BlockSize;
  else if (field == "miner_count")
    spec.field = SweepField::MinerCount;
  else if (field == "block_interval")
    spec.field = SweepField::BlockInterval;
  else
    fail(path + ".field",
         "expected one of server_capacity, block_size, miner_count, "
         "block_interval");
  const auto git = j.find("grid");
  if (git == j.end()) fail(path + ".grid", "required");
  if (!git->is_array() || git->empty())
    fail(path + ".grid", "expected a nonempty array");
  for (std::size_t i = 0; i < git->size(); ++i) {
    const double v =
        as_number((*git)[i], path + ".grid[" + std::to_string(i) + "]");
    if (!spec.grid.empty() && v <= spec.grid.back())
      fail(path + ".grid", "must be strictly increasing");
    spec.grid.push_back(v);
  }
  return spec;
}

}  // namespace scenario_detail

inline Scenario parse_scenario(const ordered_json& root) {
  using namespace scenario_detail;
  if (!root.is_object()) fail("scenario", "expected a top-level object");
  check_keys(root, "scenario",
             {"servers", "links", "users", "params", "costs", "solver",
              "sweep"});

  Scenario scenario;
  std::vector<Server> servers = make_default_servers(50);
  std::vector<Link> links;
  std::vector<UserDevice> users = make_default_users(50);
  BlockchainParams params;
  CostTable costs;
  if (const auto it = root.find("servers"); it != root.end())
    servers = parse_servers(*it, "servers");
  if (const auto it = root.find("links"); it != root.end())
    links = parse_links(*it, "links");
  if (const auto it = root.find("users"); it != root.end())
    users = parse_users(*it, "users");
  if (const auto it = root.find("params"); it != root.end())
    params = parse_params(*it, "params");
  if (const auto it = root.find("costs"); it != root.end())
    costs = parse_costs(*it, "costs");
  if (const auto it = root.find("solver"); it != root.end())
    scenario.solver = parse_solver(*it, "solver");
  if (const auto it = root.find("sweep"); it != root.end())
    scenario.sweep = parse_sweep(*it, "sweep");

  ValidationResult validated = validate_instance(
      ServerGraph{std::move(servers), std::move(links)}, users, params, costs);
  if (!validated.ok()) throw ValidationError(std::move(validated.issues));
  scenario.instance = std::move(*validated.instance);
  return scenario;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  ordered_json root;
  try {
    root = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return parse_scenario(root);
}

inline MmOptions solver_options(const SolverSettings& s) {
  MmOptions opt;
  opt.mu = s.mu;
  opt.max_iter = s.max_iter;
  opt.conv_tol = s.tol;
  return opt;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  std::string sweep_field;
  double sweep_value = 0.0;
  std::string framework;  // "bfv" or "baseline"
  bool has_report = false;
  EvaluationReport report;
  int solver_iters = 0;
  std::string solver_status;
};

// Rebuilds the instance at one grid point of the swept field.
inline Instance instance_at(const Instance& base, SweepField field,
                            double value) {
  Instance inst = base;
  switch (field) {
    case SweepField::ServerCapacity:
      for (auto& s : inst.graph.servers) s.capacity_hz = value;
      break;
    case SweepField::BlockSize:
      inst.params.n_trans = static_cast<std::int64_t>(std::llround(value));
      break;
    case SweepField::MinerCount:
      inst.users = make_default_users(
          static_cast<int>(std::llround(value)));
      break;
    case SweepField::BlockInterval:
      inst.params.t_th_s = value;
      break;
  }
  return inst;
}

namespace scenario_detail {

inline double mean(const std::vector<MinerValue>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& v : values) sum += v.value;
  return sum / static_cast<double>(values.size());
}

inline std::string mm_status(const SolverTrace& trace) {
  std::string s = trace.termination == MmTermination::Converged
                      ? "converged"
                      : "max_iter";
  if (trace.c1_relaxed) s += "_c1_relaxed";
  return s;
}

inline std::string error_status(const std::runtime_error& e) {
  if (dynamic_cast<const InfeasibleError*>(&e)) return "error:infeasible";
  if (dynamic_cast<const RepairFailedError*>(&e)) return "error:repair_failed";
  if (dynamic_cast<const SearchSpaceTooLargeError*>(&e))
    return "error:search_space_too_large";
  return "error:solver";
}

}  // namespace scenario_detail

inline std::vector<SweepRow> run_sweep(const Scenario& scenario) {
  if (!scenario.sweep)
    throw ValidationError({{ValidationCode::MissingRole,
                            "scenario has no sweep specification"}});
  const SweepSpec& spec = *scenario.sweep;
  const MmOptions opt = solver_options(scenario.solver);
  std::vector<SweepRow> rows;
  for (const double value : spec.grid) {
    SweepRow bfv_row, base_row;
    bfv_row.sweep_field = base_row.sweep_field = to_string(spec.field);
    bfv_row.sweep_value = base_row.sweep_value = value;
    bfv_row.framework = "bfv";
    base_row.framework = "baseline";

    Instance inst = instance_at(scenario.instance, spec.field, value);
    ValidationResult validated =
        validate_instance(inst.graph, inst.users, inst.params, inst.costs);
    if (!validated.ok()) {
      bfv_row.solver_status = base_row.solver_status = "error:validation";
    } else {
      const WorkloadPlan plan = build_workload(inst);
      try {
        MmResult solved = mm_solve(inst, plan, opt);
        bfv_row.report = evaluate(solved.placement, inst, plan);
        bfv_row.has_report = true;
        bfv_row.solver_iters =
            static_cast<int>(solved.trace.iterations.size());
        bfv_row.solver_status = scenario_detail::mm_status(solved.trace);
      } catch (const std::runtime_error& e) {
        bfv_row.solver_status = scenario_detail::error_status(e);
      }
      try {
        BaselineResult solved = evaluate_baseline(inst, plan, opt);
        base_row.report = solved.report;
        base_row.has_report = true;
        base_row.solver_iters = solved.solver_iters;
        base_row.solver_status = solved.solver_status;
        if (solved.c1_relaxed) base_row.solver_status += "_c1_relaxed";
      } catch (const std::runtime_error& e) {
        base_row.solver_status = scenario_detail::error_status(e);
      }
    }
    rows.push_back(std::move(bfv_row));
    rows.push_back(std::move(base_row));
  }
  return rows;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string csv =
      "sweep_field,sweep_value,framework,feasible,e_ran_j,e_mec_j,e_total_j,"
      "t_ran_s,t_mec_s,p_orphan,avg_p_mining,avg_r_mining,sum_r_mining,"
      "confirmation_rate_tps,objective,solver_iters,solver_status\n";
  for (const auto& row : rows) {
    csv += row.sweep_field;
    csv += ',';
    csv += format_double(row.sweep_value);
    csv += ',';
    csv += row.framework;
    csv += ',';
    if (row.has_report) {
      const auto& r = row.report;
      csv += r.feasible ? "true" : "false";
      csv += ',';
      csv += format_double(r.e_ran_j) + ',';
      csv += format_double(r.e_mec_j) + ',';
      csv += format_double(r.e_total_j) + ',';
      csv += format_double(r.t_ran_s) + ',';
      csv += format_double(r.t_mec_s) + ',';
      csv += format_double(r.p_orphan) + ',';
      csv += format_double(scenario_detail::mean(r.p_mining)) + ',';
      csv += format_double(scenario_detail::mean(r.r_mining)) + ',';
      csv += format_double(r.r_mining_sum) + ',';
      csv += format_double(r.confirmation_rate_tps) + ',';
      csv += format_double(r.objective) + ',';
    } else {
      csv += "false,,,,,,,,,,,,";
    }
    csv += std::to_string(row.solver_iters);
    csv += ',';
    csv += row.solver_status;
    csv += '\n';
  }
  return csv;
}

// ---------------------------------------------------------------------------
// Comparison and JSON emission

struct CompareReport {
  EvaluationReport bfv;
  SolverTrace bfv_trace;
  BaselineResult baseline;
};

inline CompareReport compare(const Scenario& scenario) {
  const Instance& inst = scenario.instance;
  const WorkloadPlan plan = build_workload(inst);
  const MmOptions opt = solver_options(scenario.solver);
  CompareReport report;
  MmResult solved = mm_solve(inst, plan, opt);
  report.bfv = evaluate(solved.placement, inst, plan);
  report.bfv_trace = std::move(solved.trace);
  report.baseline = evaluate_baseline(inst, plan, opt);
  return report;
}

inline ordered_json miner_values_to_json(const std::vector<MinerValue>& v) {
  ordered_json arr = ordered_json::array();
  for (const auto& m : v)
    arr.push_back({{"user_id", m.user_id}, {"value", m.value}});
  return arr;
}

inline ordered_json report_to_json(const EvaluationReport& r) {
  ordered_json j;
  j["feasible"] = r.feasible;
  j["e_ran_j"] = r.e_ran_j;
  j["e_mec_j"] = r.e_mec_j;
  j["e_total_j"] = r.e_total_j;
  j["t_ran_s"] = r.t_ran_s;
  j["t_mec_s"] = r.t_mec_s;
  j["p_orphan"] = r.p_orphan;
  j["p_mining"] = miner_values_to_json(r.p_mining);
  j["r_mining"] = miner_values_to_json(r.r_mining);
  j["sum_r_mining"] = r.r_mining_sum;
  j["confirmation_rate_tps"] = r.confirmation_rate_tps;
  j["objective"] = r.objective;
  ordered_json violations = ordered_json::array();
  for (const auto& v : r.violations)
    violations.push_back({{"constraint", v.constraint}, {"detail", v.detail}});
  j["violations"] = violations;
  return j;
}

inline ordered_json trace_to_json(const SolverTrace& t) {
  ordered_json j;
  j["iterations"] = t.iterations.size();
  j["termination"] = t.termination == MmTermination::Converged
                         ? "converged"
                         : "max_iter";
  j["c1_relaxed"] = t.c1_relaxed;
  j["relaxed_lp_value"] = t.relaxed_lp_value;
  j["lp_pivots"] = t.lp_pivots;
  ordered_json steps = ordered_json::array();
  for (const auto& it : t.iterations)
    steps.push_back({{"surrogate_value", it.surrogate_value},
                     {"penalized_value", it.penalized_value},
                     {"max_integrality_gap", it.max_integrality_gap},
                     {"max_change", it.max_change}});
  j["trace"] = steps;
  return j;
}

inline ordered_json placement_to_json(const Placement& placement,
                                      const WorkloadPlan& plan) {
  if (placement.is_fractional())
    throw std::invalid_argument("only binary placements serialize");
  ordered_json assignments = ordered_json::array();
  for (int d = 0; d < plan.demand_count(); ++d)
    assignments.push_back({{"user_id", plan.demands[d].user_id},
                           {"function_index", plan.demands[d].function_index},
                           {"server_id", placement.server_ids[d]}});
  return ordered_json{{"assignments", assignments}};
}

inline Placement placement_from_json(const ordered_json& j,
                                     const WorkloadPlan& plan) {
  using namespace scenario_detail;
  if (!j.is_object()) fail("placement", "expected a top-level object");
  check_keys(j, "placement", {"assignments"});
  const auto it = j.find("assignments");
  if (it == j.end() || !it->is_array())
    fail("placement.assignments", "expected an array");
  std::map<std::pair<std::int64_t, int>, std::int64_t> map;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string p = "placement.assignments[" + std::to_string(i) + "]";
    const auto& e = (*it)[i];
    if (!e.is_object()) fail(p, "expected an object");
    check_keys(e, p, {"user_id", "function_index", "server_id"});
    const auto uit = e.find("user_id");
    const auto fit = e.find("function_index");
    const auto sit = e.find("server_id");
    if (uit == e.end()) fail(p + ".user_id", "required");
    if (fit == e.end()) fail(p + ".function_index", "required");
    if (sit == e.end()) fail(p + ".server_id", "required");
    const auto key = std::make_pair(
        as_integer(*uit, p + ".user_id"),
        static_cast<int>(as_integer(*fit, p + ".function_index")));
    if (!map.emplace(key, as_integer(*sit, p + ".server_id")).second)
      fail(p, "duplicate (user_id, function_index)");
  }
  Placement placement;
  placement.server_ids.resize(plan.demand_count(), -1);
  for (int d = 0; d < plan.demand_count(); ++d) {
    const auto key = std::make_pair(plan.demands[d].user_id,
                                    plan.demands[d].function_index);
    const auto found = map.find(key);
    if (found == map.end())
      fail("placement",
           "missing assignment for user " + std::to_string(key.first) +
               " function " + std::to_string(key.second));
    placement.server_ids[d] = found->second;
    map.erase(found);
  }
  if (!map.empty())
    fail("placement", "assignment references no workload demand (user " +
                          std::to_string(map.begin()->first.first) +
                          ", function " +
                          std::to_string(map.begin()->first.second) + ")");
  return placement;
}

inline ordered_json compare_to_json(const CompareReport& c) {
  ordered_json j;
  j["bfv"] = report_to_json(c.bfv);
  j["bfv_solver"] = trace_to_json(c.bfv_trace);
  j["baseline"] = report_to_json(c.baseline.report);
  j["baseline_solver"] = {{"status", c.baseline.solver_status},
                          {"iterations", c.baseline.solver_iters},
                          {"c1_relaxed", c.baseline.c1_relaxed}};
  const auto& b = c.baseline.report;
  j["delta"] = {{"e_total_j", b.e_total_j - c.bfv.e_total_j},
                {"t_total_s", (b.t_ran_s + b.t_mec_s) -
                                  (c.bfv.t_ran_s + c.bfv.t_mec_s)},
                {"objective", b.objective - c.bfv.objective},
                {"confirmation_rate_tps",
                 b.confirmation_rate_tps - c.bfv.confirmation_rate_tps}};
  return j;
}

}  // namespace bfv
