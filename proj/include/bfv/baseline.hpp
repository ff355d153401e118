#pragma once

// Reference framework: every blockchain function runs locally on the
// requesting device except mining, which is offloaded to the server graph.
// Device processing and gossip energy fold into the MEC energy column and
// the slowest device's serial time folds into the MEC delay column, so the
// report keeps the e_total = e_ran + e_mec identity of the virtualized
// framework and both frameworks share one schema.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bfv/analytics.hpp"
#include "bfv/domain.hpp"
#include "bfv/placement.hpp"
#include "bfv/workload.hpp"

namespace bfv {

struct BaselineResult {
  EvaluationReport report;
  Placement mining_placement;
  WorkloadPlan mining_plan;
  int solver_iters = 0;            // 0 for the exact oracle
  std::string solver_status;       // "exact", "converged", or "max_iter"
  bool c1_relaxed = false;
};

inline BaselineResult evaluate_baseline(const Instance& instance,
                                        const WorkloadPlan& plan,
                                        const MmOptions& opt = {}) {
  const auto& users = instance.users;
  const auto& params = instance.params;

  // Split the workload: mining demands go to servers, broadcasts cost the
  // device gossip energy, everything else executes serially on the device.
  std::vector<double> local_time(users.size(), 0.0);
  double local_energy = 0.0;
  double gossip_energy = 0.0;
  std::vector<FunctionChain> mining_chains;
  for (const auto& d : plan.demands) {
    if (d.kind == FunctionKind::Mining) {
      if (!mining_chains.empty() &&
          mining_chains.back().user_id == d.user_id) {
        mining_chains.back().demands.push_back(
            FunctionDemand{d.user_id, d.kind, d.cycles, params.header_bytes,
                           0.0});
      } else {
        mining_chains.push_back(FunctionChain{
            d.user_id,
            {FunctionDemand{d.user_id, d.kind, d.cycles, params.header_bytes,
                            0.0}}});
      }
      continue;
    }
    if (is_broadcast(d.kind)) {
      gossip_energy += instance.costs.gossip_energy_j;
      continue;
    }
    for (std::size_t u = 0; u < users.size(); ++u) {
      if (users[u].id != d.user_id) continue;
      const double t = d.cycles / users[u].local_capacity_hz;
      local_time[u] += t;
      local_energy += users[u].local_power_w * t;
      break;
    }
  }
  const double max_local =
      local_time.empty()
          ? 0.0
          : *std::max_element(local_time.begin(), local_time.end());

  BaselineResult result;
  result.mining_plan = plan_from_chains(mining_chains, users);
  const WorkloadPlan& mining_plan = result.mining_plan;
  EvaluationReport& rep = result.report;
  rep.t_ran_s = t_ran(mining_plan, users);
  rep.e_ran_j = e_ran(mining_plan, users);

  double mining_t = 0.0, mining_e = 0.0;
  std::vector<double> mining_loads(instance.graph.servers.size(), 0.0);
  if (mining_plan.demand_count() > 0) {
    const double mec_budget = params.t_th_s - max_local - rep.t_ran_s;
    double space = 1.0;
    bool small = true;
    for (int d = 0; d < mining_plan.demand_count() && small; ++d) {
      space *= static_cast<double>(instance.graph.servers.size());
      small = space <= 1e7;
    }
    if (small) {
      BruteForceOptions bf;
      bf.c1_mec_budget_s = mec_budget;
      auto solved = brute_force_solve(instance, mining_plan, bf);
      result.mining_placement = std::move(solved.placement);
      result.c1_relaxed = solved.c1_relaxed;
      result.solver_status = "exact";
    } else {
      MmOptions mm = opt;
      mm.c1_mec_budget_s = mec_budget;
      auto solved = mm_solve(instance, mining_plan, mm);
      result.mining_placement = std::move(solved.placement);
      result.c1_relaxed = solved.trace.c1_relaxed;
      result.solver_iters = static_cast<int>(solved.trace.iterations.size());
      result.solver_status =
          solved.trace.termination == MmTermination::Converged ? "converged"
                                                               : "max_iter";
    }
    mining_t = t_mec(result.mining_placement, mining_plan, instance.graph);
    mining_e = e_mec(result.mining_placement, mining_plan, instance.graph,
                     instance.costs);
    mining_loads = detail::server_loads_cycles(result.mining_placement,
                                               mining_plan, instance.graph);
  } else {
    result.solver_status = "exact";
  }

  rep.t_mec_s = max_local + mining_t;
  rep.e_mec_j = local_energy + gossip_energy + mining_e;
  rep.e_total_j = rep.e_ran_j + rep.e_mec_j;
  rep.p_mining = p_mining(plan);
  rep.p_orphan = p_orphan(params);
  rep.r_mining = r_mining(params, rep.p_mining, rep.p_orphan);
  rep.r_mining_sum = 0.0;
  for (const auto& m : rep.r_mining) rep.r_mining_sum += m.value;
  rep.confirmation_rate_tps =
      confirmation_rate(params, rep.t_ran_s, rep.t_mec_s, rep.p_orphan);
  rep.objective = rep.e_total_j - rep.r_mining_sum;

  if (rep.t_ran_s + rep.t_mec_s > params.t_th_s + kFeasibilityEps)
    rep.violations.push_back(
        {"C1", "total latency " + std::to_string(rep.t_ran_s + rep.t_mec_s) +
                   " s exceeds t_th = " + std::to_string(params.t_th_s) +
                   " s"});
  for (std::size_t n = 0; n < mining_loads.size(); ++n) {
    const auto& server = instance.graph.servers[n];
    const double budget = server.capacity_hz * params.t_th_s;
    if (mining_loads[n] > budget * (1.0 + 1e-12) + kFeasibilityEps)
      rep.violations.push_back(
          {"C2", "server " + std::to_string(server.id) + " assigned " +
                     std::to_string(mining_loads[n]) + " cycles, budget " +
                     std::to_string(budget)});
  }
  rep.feasible = rep.violations.empty();
  return result;
}

inline BaselineResult evaluate_baseline(const Instance& instance,
                                        const MmOptions& opt = {}) {
  return evaluate_baseline(instance, build_workload(instance), opt);
}

}  // namespace bfv
