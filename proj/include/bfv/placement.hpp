#pragma once

// Placement solvers for the function-placement problem: an exact
// enumeration oracle, the penalized-relaxation majorization-minimization
// solver with an inner LP, greedy repair of rounded solutions, and a
// block-size decision sweep.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bfv/analytics.hpp"
#include "bfv/domain.hpp"
#include "bfv/linprog.hpp"
#include "bfv/workload.hpp"

namespace bfv {

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SearchSpaceTooLargeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RepairFailedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AllInfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MmTermination { Converged, MaxIterations };

struct SolverIteration {
  double surrogate_value = 0.0;   // tangent majorizer evaluated at the iterate
  double penalized_value = 0.0;   // objective + mu * sum(x - x^2)
  double max_integrality_gap = 0.0;
  double max_change = 0.0;
};

struct SolverTrace {
  std::vector<SolverIteration> iterations;
  MmTermination termination = MmTermination::Converged;
  bool c1_relaxed = false;        // deadline row dropped after infeasibility
  double relaxed_lp_value = 0.0;  // penalty-free LP bound on the objective
  int lp_pivots = 0;
};

struct MmOptions {
  std::optional<double> mu;  // default: 10x the largest placement cost
  int max_iter = 100;
  double conv_tol = 1e-5;
  bool allow_c1_relaxation = true;
  // Allowed summed processing seconds; default t_th - t_ran(plan).
  std::optional<double> c1_mec_budget_s;
};

struct MmResult {
  Placement placement;
  SolverTrace trace;
};

struct BruteForceOptions {
  bool allow_c1_relaxation = true;
  std::optional<double> c1_mec_budget_s;
  double search_space_guard = 1e7;
};

struct BruteForceResult {
  Placement placement;
  EvaluationReport report;
  bool c1_relaxed = false;
};

namespace placement_detail {

// Graph positions in ascending server-id order; makes "lowest server id"
// tie-breaks fall out of plain iteration order.
inline std::vector<int> id_sorted_positions(const ServerGraph& graph) {
  std::vector<int> order(graph.servers.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return graph.servers[a].id < graph.servers[b].id;
  });
  return order;
}

// Per-(demand, ordered server) share of E_MEC.
inline double placement_cost(const PlannedDemand& d, const Server& s,
                             const CostTable& costs) {
  double c = s.power_w * d.cycles / s.capacity_hz;
  if (is_broadcast(d.kind)) c += costs.gossip_energy_j;
  return c;
}

// C2 budget with the same slack evaluate() grants.
inline double budget_limit(double budget) {
  return budget * (1.0 + 1e-12) + kFeasibilityEps;
}

// Objective contribution that does not depend on the placement.
inline double placement_invariant_terms(const Instance& instance,
                                        const WorkloadPlan& plan) {
  double extra = e_ran(plan, instance.users);
  const bool has_miners =
      std::any_of(plan.demands.begin(), plan.demands.end(),
                  [](const PlannedDemand& d) { return d.in_mining_chain; });
  if (has_miners) {
    const auto p = p_mining(plan);
    const auto r = r_mining(instance.params, p, p_orphan(instance.params));
    for (const auto& m : r) extra -= m.value;
  }
  return extra;
}

}  // namespace placement_detail

inline BruteForceResult brute_force_solve(
    const Instance& instance, const WorkloadPlan& plan,
    const BruteForceOptions& opt = {}) {
  const int demand_count = plan.demand_count();
  const int server_count = static_cast<int>(instance.graph.servers.size());
  if (server_count == 0) throw InfeasibleError("no servers to place onto");

  double space = 1.0;
  for (int d = 0; d < demand_count; ++d) {
    space *= server_count;
    if (space > opt.search_space_guard)
      throw SearchSpaceTooLargeError(
          "placement search space exceeds " +
          std::to_string(opt.search_space_guard) + " leaves");
  }

  const auto order = placement_detail::id_sorted_positions(instance.graph);
  std::vector<double> limit(server_count), seconds_per_cycle(server_count);
  for (int n = 0; n < server_count; ++n) {
    const auto& s = instance.graph.servers[n];
    limit[n] = placement_detail::budget_limit(s.capacity_hz *
                                              instance.params.t_th_s);
    seconds_per_cycle[n] = 1.0 / s.capacity_hz;
  }
  std::vector<std::vector<double>> cost(demand_count,
                                        std::vector<double>(server_count));
  for (int d = 0; d < demand_count; ++d)
    for (int n = 0; n < server_count; ++n)
      cost[d][n] = placement_detail::placement_cost(
          plan.demands[d], instance.graph.servers[n], instance.costs);

  const double c1_budget = opt.c1_mec_budget_s.value_or(
      instance.params.t_th_s - t_ran(plan, instance.users));

  std::vector<int> assign(demand_count, -1), best_assign;
  std::vector<double> used(server_count, 0.0);
  double best_cost = std::numeric_limits<double>::infinity();

  auto dfs = [&](auto&& self, int d, double e_acc, double t_acc,
                 bool with_c1) -> void {
    if (e_acc >= best_cost) return;
    if (d == demand_count) {
      best_cost = e_acc;
      best_assign = assign;
      return;
    }
    const double cycles = plan.demands[d].cycles;
    for (int pos : order) {
      if (used[pos] + cycles > limit[pos]) continue;
      const double t_next = t_acc + cycles * seconds_per_cycle[pos];
      if (with_c1 && t_next > c1_budget + kFeasibilityEps) continue;
      assign[d] = pos;
      used[pos] += cycles;
      self(self, d + 1, e_acc + cost[d][pos], t_next, with_c1);
      used[pos] -= cycles;
      assign[d] = -1;
    }
  };

  bool c1_relaxed = false;
  if (c1_budget > 0.0) dfs(dfs, 0, 0.0, 0.0, /*with_c1=*/true);
  if (best_assign.empty()) {
    if (!opt.allow_c1_relaxation)
      throw InfeasibleError("no placement satisfies the deadline constraint");
    c1_relaxed = true;
    dfs(dfs, 0, 0.0, 0.0, /*with_c1=*/false);
  }
  if (best_assign.empty())
    throw InfeasibleError("no placement satisfies the per-server budgets");

  Placement placement;
  placement.server_ids.resize(demand_count);
  for (int d = 0; d < demand_count; ++d)
    placement.server_ids[d] = instance.graph.servers[best_assign[d]].id;
  BruteForceResult result;
  result.report = evaluate(placement, instance, plan);
  result.placement = std::move(placement);
  result.c1_relaxed = c1_relaxed;
  return result;
}

inline BruteForceResult brute_force_solve(const Instance& instance,
                                          const BruteForceOptions& opt = {}) {
  return brute_force_solve(instance, build_workload(instance), opt);
}

// Moves demands off overloaded servers until the per-server cycle budgets
// hold: repeatedly take the smallest demand on the most-overloaded server
// and move it to the feasible server whose E_MEC share is cheapest.
inline Placement repair(Placement placement, const Instance& instance,
                        const WorkloadPlan& plan, long max_moves = -1,
                        bool enforce_c1 = true,
                        std::optional<double> c1_mec_budget_s = std::nullopt) {
  if (placement.is_fractional())
    throw std::invalid_argument("repair requires a binary placement");
  const int demand_count = plan.demand_count();
  if (static_cast<int>(placement.server_ids.size()) != demand_count)
    throw UnplacedDemandError("placement does not cover all demands");
  const int server_count = static_cast<int>(instance.graph.servers.size());
  if (max_moves < 0) max_moves = 10L * demand_count;

  const auto order = placement_detail::id_sorted_positions(instance.graph);
  std::vector<double> used(server_count, 0.0), limit(server_count);
  std::vector<int> where(demand_count);
  for (int n = 0; n < server_count; ++n)
    limit[n] = placement_detail::budget_limit(
        instance.graph.servers[n].capacity_hz * instance.params.t_th_s);
  for (int d = 0; d < demand_count; ++d) {
    const int pos = instance.graph.index_of(placement.server_ids[d]);
    if (pos < 0)
      throw UnplacedDemandError("demand " + std::to_string(d) +
                                " names a missing server");
    where[d] = pos;
    used[pos] += plan.demands[d].cycles;
  }

  long moves = 0;
  for (;;) {
    int worst = -1;
    double worst_excess = 0.0;
    for (int pos : order) {
      const double excess = used[pos] - limit[pos];
      if (excess > worst_excess) {
        worst_excess = excess;
        worst = pos;
      }
    }
    if (worst < 0) break;
    if (moves >= max_moves)
      throw RepairFailedError("budget repair exceeded the move allowance");

    int victim = -1;
    for (int d = 0; d < demand_count; ++d)
      if (where[d] == worst &&
          (victim < 0 || plan.demands[d].cycles < plan.demands[victim].cycles))
        victim = d;
    if (victim < 0)
      throw RepairFailedError("overloaded server hosts no demands");

    const double cycles = plan.demands[victim].cycles;
    int target = -1;
    double target_cost = std::numeric_limits<double>::infinity();
    for (int pos : order) {
      if (pos == worst || used[pos] + cycles > limit[pos]) continue;
      const double c = placement_detail::placement_cost(
          plan.demands[victim], instance.graph.servers[pos], instance.costs);
      if (c < target_cost) {
        target_cost = c;
        target = pos;
      }
    }
    if (target < 0)
      throw RepairFailedError("no server can absorb the moved demand");
    used[worst] -= cycles;
    used[target] += cycles;
    where[victim] = target;
    placement.server_ids[victim] = instance.graph.servers[target].id;
    ++moves;
  }

  if (enforce_c1) {
    const double budget = c1_mec_budget_s.value_or(
        instance.params.t_th_s - t_ran(plan, instance.users));
    const auto total_time = [&] {
      double s = 0.0;
      for (int d = 0; d < demand_count; ++d)
        s += plan.demands[d].cycles / instance.graph.servers[where[d]].capacity_hz;
      return s;
    };
    // Rounding can overshoot the deadline even when every server budget
    // holds; shifting work toward faster servers with spare budget brings
    // the summed processing time back down without re-breaking C2.
    while (total_time() > budget + kFeasibilityEps) {
      int best_d = -1, best_pos = -1;
      double best_delta = 0.0;
      for (int d = 0; d < demand_count; ++d) {
        const double cycles = plan.demands[d].cycles;
        const double from_s =
            cycles / instance.graph.servers[where[d]].capacity_hz;
        for (int pos : order) {
          if (pos == where[d] || used[pos] + cycles > limit[pos]) continue;
          const double delta =
              cycles / instance.graph.servers[pos].capacity_hz - from_s;
          if (delta < best_delta) {
            best_delta = delta;
            best_d = d;
            best_pos = pos;
          }
        }
      }
      if (best_d < 0)
        throw RepairFailedError("repaired placement misses the deadline");
      if (moves >= max_moves)
        throw RepairFailedError("budget repair exceeded the move allowance");
      used[where[best_d]] -= plan.demands[best_d].cycles;
      used[best_pos] += plan.demands[best_d].cycles;
      where[best_d] = best_pos;
      placement.server_ids[best_d] = instance.graph.servers[best_pos].id;
      ++moves;
    }
  }
  return placement;
}

inline MmResult mm_solve(const Instance& instance, const WorkloadPlan& plan,
                         const MmOptions& opt = {}) {
  const int demand_count = plan.demand_count();
  const int server_count = static_cast<int>(instance.graph.servers.size());
  if (server_count == 0) throw InfeasibleError("no servers to place onto");
  if (opt.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (opt.mu && (!(*opt.mu >= 0.0) || !std::isfinite(*opt.mu)))
    throw std::invalid_argument("penalty mu must be >= 0");

  MmResult result;
  if (demand_count == 0) {
    result.trace.termination = MmTermination::Converged;
    return result;
  }

  const auto order = placement_detail::id_sorted_positions(instance.graph);
  const int nvars = demand_count * server_count;
  std::vector<double> cost(nvars);
  for (int d = 0; d < demand_count; ++d)
    for (int k = 0; k < server_count; ++k)
      cost[d * server_count + k] = placement_detail::placement_cost(
          plan.demands[d], instance.graph.servers[order[k]], instance.costs);
  double mu = opt.mu.value_or(0.0);
  if (!opt.mu) {
    double cmax = 0.0;
    for (double c : cost) cmax = std::max(cmax, c);
    mu = cmax > 0.0 ? 10.0 * cmax : 1.0;
  }
  const double extra = placement_detail::placement_invariant_terms(instance,
                                                                   plan);
  const double c1_budget = opt.c1_mec_budget_s.value_or(
      instance.params.t_th_s - t_ran(plan, instance.users));

  // Rows: one assignment row per demand, one budget row per server, and
  // optionally the shared deadline row; all scaled to unit right-hand sides.
  auto make_solver = [&](bool with_c1) {
    const int rows = demand_count + server_count + (with_c1 ? 1 : 0);
    std::vector<double> rhs(rows, 1.0);
    lp_detail::BoundedSimplex solver(std::move(rhs));
    for (int d = 0; d < demand_count; ++d) {
      const double cycles = plan.demands[d].cycles;
      for (int k = 0; k < server_count; ++k) {
        const auto& s = instance.graph.servers[order[k]];
        std::vector<std::pair<int, double>> col;
        col.emplace_back(d, 1.0);
        if (cycles > 0.0) {
          col.emplace_back(demand_count + k,
                           cycles / (s.capacity_hz * instance.params.t_th_s));
          if (with_c1)
            col.emplace_back(demand_count + server_count,
                             cycles / (s.capacity_hz * c1_budget));
        }
        solver.add_variable(0.0, 1.0, 0.0, std::move(col));
      }
    }
    for (int k = 0; k < server_count + (with_c1 ? 1 : 0); ++k)
      solver.add_variable(0.0, lp_detail::kInf, 0.0,
                          {{demand_count + k, 1.0}});
    return solver;
  };

  const int slack_count_strict = server_count + 1;
  const int slack_count_relaxed = server_count;
  std::vector<double> x_prev(nvars, 1.0 / server_count);
  std::vector<double> lp_costs;
  auto load_costs = [&](lp_detail::BoundedSimplex& solver, int slacks) {
    lp_costs.assign(nvars + slacks, 0.0);
    for (int j = 0; j < nvars; ++j)
      lp_costs[j] = cost[j] + mu * (1.0 - 2.0 * x_prev[j]);
    solver.set_costs(lp_costs);
  };

  bool c1_relaxed = c1_budget <= 0.0;
  std::optional<lp_detail::BoundedSimplex> solver;
  if (!c1_relaxed) {
    solver.emplace(make_solver(true));
    load_costs(*solver, slack_count_strict);
    if (solver->solve() != LpStatus::Optimal) c1_relaxed = true;
  }
  if (c1_relaxed) {
    if (!opt.allow_c1_relaxation)
      throw InfeasibleError("relaxed placement problem is infeasible");
    solver.emplace(make_solver(false));
    load_costs(*solver, slack_count_relaxed);
    if (solver->solve() != LpStatus::Optimal)
      throw InfeasibleError("no fractional placement satisfies the budgets");
  }
  const int slacks = c1_relaxed ? slack_count_relaxed : slack_count_strict;

  SolverTrace trace;
  trace.c1_relaxed = c1_relaxed;
  std::vector<double> x(nvars);
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    if (iter > 1) {
      load_costs(*solver, slacks);
      if (solver->solve() != LpStatus::Optimal)
        throw std::runtime_error("warm LP restart lost feasibility");
    }
    double pure = 0.0, penalty = 0.0, prev_sq = 0.0;
    SolverIteration it;
    for (int j = 0; j < nvars; ++j) {
      x[j] = solver->value_of(j);
      pure += cost[j] * x[j];
      penalty += x[j] - x[j] * x[j];
      prev_sq += x_prev[j] * x_prev[j];
      it.max_integrality_gap =
          std::max(it.max_integrality_gap, std::abs(x[j] - std::round(x[j])));
      it.max_change = std::max(it.max_change, std::abs(x[j] - x_prev[j]));
    }
    it.surrogate_value = solver->objective() + mu * prev_sq + extra;
    it.penalized_value = pure + mu * penalty + extra;
    trace.iterations.push_back(it);
    if (iter == 1) trace.relaxed_lp_value = pure + extra;
    x_prev = x;
    if (it.max_change < opt.conv_tol) {
      trace.termination = MmTermination::Converged;
      break;
    }
    trace.termination = iter == opt.max_iter ? MmTermination::MaxIterations
                                             : trace.termination;
  }
  trace.lp_pivots = solver->pivots();

  Placement rounded;
  rounded.server_ids.resize(demand_count);
  for (int d = 0; d < demand_count; ++d) {
    int best_k = 0;
    for (int k = 1; k < server_count; ++k)
      if (x[d * server_count + k] > x[d * server_count + best_k]) best_k = k;
    rounded.server_ids[d] = instance.graph.servers[order[best_k]].id;
  }
  result.placement = repair(std::move(rounded), instance, plan, -1,
                            /*enforce_c1=*/!c1_relaxed, c1_budget);

  // Rounding can misplace the demands that straddle the binding budget and
  // deadline rows. Two deterministic refinement passes clean that up: an
  // exhaustive re-placement of the heaviest demands (bounded combination
  // count), then a steepest single-move descent over the rest.
  {
    std::vector<int> pos_to_k(server_count);
    for (int k = 0; k < server_count; ++k) pos_to_k[order[k]] = k;
    std::vector<double> used(server_count, 0.0), limit(server_count);
    std::vector<double> speed(server_count);
    std::vector<int> at(demand_count);
    for (int k = 0; k < server_count; ++k) {
      limit[k] = placement_detail::budget_limit(
          instance.graph.servers[order[k]].capacity_hz *
          instance.params.t_th_s);
      speed[k] = instance.graph.servers[order[k]].capacity_hz;
    }
    double time_used = 0.0;
    for (int d = 0; d < demand_count; ++d) {
      const int pos = instance.graph.index_of(result.placement.server_ids[d]);
      at[d] = pos_to_k[pos];
      used[at[d]] += plan.demands[d].cycles;
      time_used +=
          plan.demands[d].cycles / instance.graph.servers[pos].capacity_hz;
    }
    const double time_limit = c1_relaxed
                                  ? lp_detail::kInf
                                  : placement_detail::budget_limit(c1_budget);

    std::vector<int> heavy(demand_count);
    for (int d = 0; d < demand_count; ++d) heavy[d] = d;
    std::sort(heavy.begin(), heavy.end(), [&](int a, int b) {
      if (plan.demands[a].cycles != plan.demands[b].cycles)
        return plan.demands[a].cycles > plan.demands[b].cycles;
      return a < b;
    });
    int q = 0;
    long combos = 1;
    while (q < demand_count && plan.demands[heavy[q]].cycles > 0.0 &&
           combos * server_count <= 100000) {
      combos *= server_count;
      ++q;
    }
    if (q > 0 && server_count > 1) {
      heavy.resize(q);
      double base_time = time_used;
      std::vector<double> base_used = used;
      double current_cost = 0.0;
      for (int i = 0; i < q; ++i) {
        const int d = heavy[i];
        base_used[at[d]] -= plan.demands[d].cycles;
        base_time -= plan.demands[d].cycles / speed[at[d]];
        current_cost += cost[d * server_count + at[d]];
      }
      std::vector<int> pick(q, 0), best_pick;
      double best_cost = current_cost - 1e-12;
      for (long c = 0; c < combos; ++c) {
        double combo_cost = 0.0, combo_time = base_time;
        std::vector<double> load = base_used;
        bool ok = true;
        for (int i = 0; i < q && ok; ++i) {
          const int d = heavy[i], k = pick[i];
          combo_cost += cost[d * server_count + k];
          combo_time += plan.demands[d].cycles / speed[k];
          load[k] += plan.demands[d].cycles;
          ok = load[k] <= limit[k];
        }
        if (ok && combo_time <= time_limit && combo_cost < best_cost) {
          best_cost = combo_cost;
          best_pick = pick;
        }
        for (int i = 0; i < q; ++i) {
          if (++pick[i] < server_count) break;
          pick[i] = 0;
        }
      }
      if (!best_pick.empty()) {
        for (int i = 0; i < q; ++i) {
          const int d = heavy[i], k = best_pick[i];
          used[at[d]] -= plan.demands[d].cycles;
          time_used -= plan.demands[d].cycles / speed[at[d]];
          used[k] += plan.demands[d].cycles;
          time_used += plan.demands[d].cycles / speed[k];
          at[d] = k;
          result.placement.server_ids[d] = instance.graph.servers[order[k]].id;
        }
      }
    }

    for (long pass = 0; pass < 10L * demand_count; ++pass) {
      int best_d = -1, best_k = -1;
      double best_gain = 1e-12;
      for (int d = 0; d < demand_count; ++d) {
        const double cycles = plan.demands[d].cycles;
        const int cur = at[d];
        for (int k = 0; k < server_count; ++k) {
          if (k == cur || used[k] + cycles > limit[k]) continue;
          const double gain =
              cost[d * server_count + cur] - cost[d * server_count + k];
          if (gain <= best_gain) continue;
          const double dt =
              cycles / instance.graph.servers[order[k]].capacity_hz -
              cycles / instance.graph.servers[order[cur]].capacity_hz;
          if (time_used + dt > time_limit) continue;
          best_gain = gain;
          best_d = d;
          best_k = k;
        }
      }
      if (best_d < 0) break;
      const double cycles = plan.demands[best_d].cycles;
      used[at[best_d]] -= cycles;
      time_used -=
          cycles / instance.graph.servers[order[at[best_d]]].capacity_hz;
      used[best_k] += cycles;
      time_used += cycles / instance.graph.servers[order[best_k]].capacity_hz;
      at[best_d] = best_k;
      result.placement.server_ids[best_d] =
          instance.graph.servers[order[best_k]].id;
    }
  }

  result.trace = std::move(trace);
  return result;
}

inline MmResult mm_solve(const Instance& instance, const MmOptions& opt = {}) {
  return mm_solve(instance, build_workload(instance), opt);
}

struct BlockSizePoint {
  std::int64_t n_trans = 0;
  bool feasible = false;
  std::string error;  // nonempty when the solver failed at this point
  EvaluationReport report;
  SolverTrace trace;
};

struct BlockSizeSweepResult {
  std::int64_t best_n_trans = 0;
  std::vector<BlockSizePoint> points;
};

// Treats block size as the decision variable: solves the placement problem
// per grid point and picks the feasible point with the best reward-energy
// balance.
inline BlockSizeSweepResult sweep_block_size(
    const Instance& instance, const std::vector<std::int64_t>& grid,
    const MmOptions& opt = {}) {
  if (grid.empty()) throw std::invalid_argument("block-size grid is empty");
  BlockSizeSweepResult result;
  int best = -1;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::int64_t n_trans : grid) {
    if (n_trans < 1)
      throw std::invalid_argument("block-size grid values must be >= 1");
    BlockSizePoint point;
    point.n_trans = n_trans;
    Instance scaled = instance;
    scaled.params.n_trans = n_trans;
    const WorkloadPlan plan = build_workload(scaled);
    try {
      MmResult solved = mm_solve(scaled, plan, opt);
      point.report = evaluate(solved.placement, scaled, plan);
      point.trace = std::move(solved.trace);
      point.feasible = point.report.feasible;
    } catch (const InfeasibleError& e) {
      point.error = e.what();
    } catch (const RepairFailedError& e) {
      point.error = e.what();
    }
    const double value = point.report.r_mining_sum - point.report.e_total_j;
    if (point.feasible && value > best_value) {
      best_value = value;
      best = static_cast<int>(result.points.size());
    }
    result.points.push_back(std::move(point));
  }
  if (best < 0)
    throw AllInfeasibleError("every block-size grid point is infeasible");
  result.best_n_trans = result.points[best].n_trans;
  return result;
}

}  // namespace bfv
