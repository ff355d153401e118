#pragma once

// Closed-form metric engine: transmission and processing delays, energy
// decomposition, mining-win probability, orphaning probability, rewards,
// confirmation rate, and whole-placement evaluation with feasibility.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bfv/domain.hpp"
#include "bfv/workload.hpp"

namespace bfv {

// Assignment of every planned demand to a server. `server_ids[d]` is the
// server id hosting demand d (canonical WorkloadPlan order), -1 if unset.
// The fractional form carries per-demand weights over graph.servers order;
// each row must sum to 1 within 1e-6.
struct Placement {
  std::vector<std::int64_t> server_ids;
  std::optional<std::vector<std::vector<double>>> fractional;

  bool is_fractional() const { return fractional.has_value(); }
};

struct MinerValue {
  std::int64_t user_id = 0;
  double value = 0.0;
};

struct ConstraintViolation {
  std::string constraint;  // "C1", "C2", "assignment"
  std::string detail;
};

struct EvaluationReport {
  double e_ran_j = 0.0;
  double e_mec_j = 0.0;
  double e_total_j = 0.0;
  double t_ran_s = 0.0;
  double t_mec_s = 0.0;
  std::vector<MinerValue> p_mining;  // in user input order
  double p_orphan = 0.0;
  std::vector<MinerValue> r_mining;
  double r_mining_sum = 0.0;
  double confirmation_rate_tps = 0.0;
  double objective = 0.0;  // e_total_j - r_mining_sum
  bool feasible = false;
  std::vector<ConstraintViolation> violations;
};

struct UnplacedDemandError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoMinersError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ZeroLatencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Feasibility slack used when comparing float loads against budgets.
inline constexpr double kFeasibilityEps = 1e-9;

namespace detail {

inline const UserDevice& user_by_id(const std::vector<UserDevice>& users,
                                    std::int64_t id) {
  for (const auto& u : users)
    if (u.id == id) return u;
  throw std::invalid_argument("unknown user id " + std::to_string(id));
}

// Seconds user `u` spends transmitting its own uplink payload.
inline double uplink_seconds(const WorkloadPlan& plan, const UserDevice& u) {
  return plan.uplink_payload_bytes(u.id) * 8.0 / u.uplink_rate_bps;
}

}  // namespace detail

// Radio-access delay: the slowest user's request upload gates block formation.
inline double t_ran(const WorkloadPlan& plan,
                    const std::vector<UserDevice>& users) {
  double worst = 0.0;
  for (const auto& u : users)
    worst = std::max(worst, detail::uplink_seconds(plan, u));
  return worst;
}

// Radio-access energy: each user pays for its own transmission time.
inline double e_ran(const WorkloadPlan& plan,
                    const std::vector<UserDevice>& users) {
  double total = 0.0;
  for (const auto& u : users)
    total += u.tx_power_w * detail::uplink_seconds(plan, u);
  return total;
}

namespace detail {

// Applies fn(demand_index, server_index, weight) for every placed share.
// Binary placements contribute weight exactly 1.0 per demand; fractional
// placements skip zero weights so an integral map follows the identical
// floating-point path as the binary form.
template <typename Fn>
void for_each_share(const Placement& placement, const WorkloadPlan& plan,
                    const ServerGraph& graph, Fn&& fn) {
  const int servers = static_cast<int>(graph.servers.size());
  if (placement.is_fractional()) {
    const auto& weights = *placement.fractional;
    if (static_cast<int>(weights.size()) != plan.demand_count())
      throw UnplacedDemandError("fractional map does not cover all demands");
    for (int d = 0; d < plan.demand_count(); ++d) {
      const auto& row = weights[d];
      if (static_cast<int>(row.size()) != servers)
        throw UnplacedDemandError("fractional row width mismatch at demand " +
                                  std::to_string(d));
      double sum = 0.0;
      for (int n = 0; n < servers; ++n) sum += row[n];
      if (std::abs(sum - 1.0) > 1e-6)
        throw UnplacedDemandError("fractional weights for demand " +
                                  std::to_string(d) + " sum to " +
                                  std::to_string(sum));
      for (int n = 0; n < servers; ++n)
        if (row[n] != 0.0) fn(d, n, row[n]);
    }
    return;
  }
  if (static_cast<int>(placement.server_ids.size()) != plan.demand_count())
    throw UnplacedDemandError("placement does not cover all demands");
  for (int d = 0; d < plan.demand_count(); ++d) {
    const int n = graph.index_of(placement.server_ids[d]);
    if (n < 0)
      throw UnplacedDemandError("demand " + std::to_string(d) +
                                " is unplaced or names a missing server");
    fn(d, n, 1.0);
  }
}

}  // namespace detail

// Summed processing delay over all placed demands.
inline double t_mec(const Placement& placement, const WorkloadPlan& plan,
                    const ServerGraph& graph) {
  double total = 0.0;
  detail::for_each_share(placement, plan, graph,
                         [&](int d, int n, double w) {
                           const double t = plan.demands[d].cycles /
                                            graph.servers[n].capacity_hz;
                           total += (w == 1.0) ? t : w * t;
                         });
  return total;
}

// Server energy: per-server power times busy time, plus the gossip energy of
// every placed broadcast-kind function.
inline double e_mec(const Placement& placement, const WorkloadPlan& plan,
                    const ServerGraph& graph, const CostTable& costs) {
  std::vector<double> busy(graph.servers.size(), 0.0);
  double broadcast_events = 0.0;
  detail::for_each_share(placement, plan, graph, [&](int d, int n, double w) {
    const double t = plan.demands[d].cycles / graph.servers[n].capacity_hz;
    busy[n] += (w == 1.0) ? t : w * t;
    if (is_broadcast(plan.demands[d].kind))
      broadcast_events += (w == 1.0) ? 1.0 : w;
  });
  double total = 0.0;
  for (std::size_t n = 0; n < busy.size(); ++n)
    total += graph.servers[n].power_w * busy[n];
  return total + costs.gossip_energy_j * broadcast_events;
}

// Total mining-chain cycles per miner, in user order.
inline std::vector<MinerValue> mining_demand_totals(const WorkloadPlan& plan) {
  std::vector<MinerValue> demands;
  for (const auto& d : plan.demands) {
    if (!d.in_mining_chain) continue;
    if (!demands.empty() && demands.back().user_id == d.user_id)
      demands.back().value += d.cycles;
    else
      demands.push_back({d.user_id, d.cycles});
  }
  if (demands.empty()) throw NoMinersError("no mining chains in workload");
  return demands;
}

// Each miner's chance of finishing first: its mining-chain demand share.
inline std::vector<MinerValue> p_mining(const WorkloadPlan& plan) {
  std::vector<MinerValue> demands = mining_demand_totals(plan);
  double total = 0.0;
  for (const auto& m : demands) total += m.value;
  for (auto& m : demands) m.value /= total;
  return demands;
}

// Probability that a competing block propagates before this one lands.
inline double p_orphan(const BlockchainParams& params) {
  const double lambda = 1.0 / params.t_th_s;
  return 1.0 - std::exp(-lambda * params.z_s_per_tx *
                        static_cast<double>(params.n_trans));
}

// Expected reward per miner: win probability times block reward times the
// survival probability.
inline std::vector<MinerValue> r_mining(const BlockchainParams& params,
                                        const std::vector<MinerValue>& p_win,
                                        double orphan_probability) {
  const double block_reward =
      params.r_const + static_cast<double>(params.n_trans) * params.r_trans;
  std::vector<MinerValue> rewards;
  rewards.reserve(p_win.size());
  for (const auto& m : p_win)
    rewards.push_back(
        {m.user_id, m.value * block_reward * (1.0 - orphan_probability)});
  return rewards;
}

// Confirmed transactions per second.
inline double confirmation_rate(const BlockchainParams& params, double t_ran_s,
                                double t_mec_s, double orphan_probability) {
  const double latency = t_ran_s + t_mec_s;
  if (!(latency > 0.0))
    throw ZeroLatencyError("total latency is zero; confirmation rate undefined");
  return static_cast<double>(params.n_trans) * (1.0 - orphan_probability) /
         latency;
}

namespace detail {

// Per-server assigned cycles under a placement.
inline std::vector<double> server_loads_cycles(const Placement& placement,
                                               const WorkloadPlan& plan,
                                               const ServerGraph& graph) {
  std::vector<double> load(graph.servers.size(), 0.0);
  for_each_share(placement, plan, graph, [&](int d, int n, double w) {
    const double c = plan.demands[d].cycles;
    load[n] += (w == 1.0) ? c : w * c;
  });
  return load;
}

}  // namespace detail

// Full metric evaluation of a placement against an instance. Feasibility
// covers C1 (deadline), C2 (per-server cycle budget per block interval), and
// the assignment constraint.
inline EvaluationReport evaluate(const Placement& placement,
                                 const Instance& instance,
                                 const WorkloadPlan& plan) {
  EvaluationReport rep;
  rep.t_ran_s = t_ran(plan, instance.users);
  rep.t_mec_s = t_mec(placement, plan, instance.graph);
  rep.e_ran_j = e_ran(plan, instance.users);
  rep.e_mec_j = e_mec(placement, plan, instance.graph, instance.costs);
  rep.e_total_j = rep.e_ran_j + rep.e_mec_j;
  rep.p_mining = p_mining(plan);
  rep.p_orphan = p_orphan(instance.params);
  rep.r_mining = r_mining(instance.params, rep.p_mining, rep.p_orphan);
  rep.r_mining_sum = 0.0;
  for (const auto& m : rep.r_mining) rep.r_mining_sum += m.value;
  rep.confirmation_rate_tps =
      confirmation_rate(instance.params, rep.t_ran_s, rep.t_mec_s, rep.p_orphan);
  rep.objective = rep.e_total_j - rep.r_mining_sum;

  if (rep.t_ran_s + rep.t_mec_s > instance.params.t_th_s + kFeasibilityEps)
    rep.violations.push_back(
        {"C1", "t_ran + t_mec = " + std::to_string(rep.t_ran_s + rep.t_mec_s) +
                   " s exceeds t_th = " + std::to_string(instance.params.t_th_s) +
                   " s"});
  const auto loads =
      detail::server_loads_cycles(placement, plan, instance.graph);
  for (std::size_t n = 0; n < loads.size(); ++n) {
    const auto& server = instance.graph.servers[n];
    const double budget = server.capacity_hz * instance.params.t_th_s;
    if (loads[n] > budget * (1.0 + 1e-12) + kFeasibilityEps)
      rep.violations.push_back(
          {"C2", "server " + std::to_string(server.id) + " assigned " +
                     std::to_string(loads[n]) + " cycles, budget " +
                     std::to_string(budget)});
  }
  rep.feasible = rep.violations.empty();
  return rep;
}

inline EvaluationReport evaluate(const Placement& placement,
                                 const Instance& instance) {
  return evaluate(placement, instance, build_workload(instance));
}

}  // namespace bfv
