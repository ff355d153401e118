#pragma once

// Monte-Carlo oracles for the closed-form probability and reward model.
// Sampling recipe (fixed so results are reproducible across platforms):
// mt19937_64 engine, uniforms u = (engine() >> 11) * 2^-53, per-partition
// seeds derived from the base seed by iterated splitmix64.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bfv/analytics.hpp"
#include "bfv/domain.hpp"
#include "bfv/workload.hpp"

namespace bfv {

struct McConfig {
  std::int64_t trials = 1'000'000;
  std::uint64_t seed = 0;
  int partitions = 1;  // worker partitions; part of the determinism contract
};

namespace mc_detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t partition_seed(std::uint64_t seed, int partition) {
  std::uint64_t z = seed;
  for (int i = 0; i <= partition; ++i) z = splitmix64(z);
  return z;
}

inline double unit_double(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

inline std::int64_t partition_trials(std::int64_t trials, int partitions,
                                     int p) {
  return trials / partitions + (p < trials % partitions ? 1 : 0);
}

inline void check_config(const McConfig& mc) {
  if (mc.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (mc.partitions < 1 || mc.partitions > mc.trials)
    throw std::invalid_argument("partitions must be in [1, trials]");
}

}  // namespace mc_detail

// Empirical win frequency per miner: each trial draws the first finisher
// with probability proportional to its mining demand.
inline std::vector<MinerValue> simulate_mining_winners(
    const std::vector<MinerValue>& demands, const McConfig& mc) {
  if (demands.empty()) throw NoMinersError("no miner demands to simulate");
  mc_detail::check_config(mc);
  std::vector<double> prefix(demands.size());
  double total = 0.0;
  for (std::size_t i = 0; i < demands.size(); ++i) {
    if (demands[i].value < 0.0)
      throw std::invalid_argument("negative mining demand");
    total += demands[i].value;
    prefix[i] = total;
  }
  if (!(total > 0.0)) throw std::invalid_argument("zero total mining demand");

  std::vector<std::int64_t> wins(demands.size(), 0);
  for (int p = 0; p < mc.partitions; ++p) {
    std::mt19937_64 engine(mc_detail::partition_seed(mc.seed, p));
    const std::int64_t n =
        mc_detail::partition_trials(mc.trials, mc.partitions, p);
    for (std::int64_t t = 0; t < n; ++t) {
      const double u = mc_detail::unit_double(engine) * total;
      std::size_t lo = 0, hi = demands.size() - 1;
      while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (prefix[mid] > u)
          hi = mid;
        else
          lo = mid + 1;
      }
      ++wins[lo];
    }
  }
  std::vector<MinerValue> freq(demands.size());
  for (std::size_t i = 0; i < demands.size(); ++i)
    freq[i] = {demands[i].user_id,
               static_cast<double>(wins[i]) / static_cast<double>(mc.trials)};
  return freq;
}

// Empirical orphan frequency: a competing block arrives after an
// exponential interval with rate 1/t_th and wins if it beats the
// propagation window z * n_trans.
inline double simulate_orphaning(const BlockchainParams& params,
                                 const McConfig& mc) {
  mc_detail::check_config(mc);
  const double window =
      params.z_s_per_tx * static_cast<double>(params.n_trans);
  std::int64_t orphans = 0;
  for (int p = 0; p < mc.partitions; ++p) {
    std::mt19937_64 engine(mc_detail::partition_seed(mc.seed, p));
    const std::int64_t n =
        mc_detail::partition_trials(mc.trials, mc.partitions, p);
    for (std::int64_t t = 0; t < n; ++t) {
      const double u = mc_detail::unit_double(engine);
      const double arrival = -params.t_th_s * std::log1p(-u);
      if (arrival < window) ++orphans;
    }
  }
  return static_cast<double>(orphans) / static_cast<double>(mc.trials);
}

struct CrossCheckEntry {
  std::string quantity;
  double analytic = 0.0;
  double empirical = 0.0;
  double bound = 0.0;  // three-sigma acceptance bound
  bool pass = false;
};

struct CrossCheckReport {
  std::vector<CrossCheckEntry> entries;
  bool pass = true;
};

// Checks supplied analytic values against fresh simulations. Split out from
// cross_check so tests can inject corrupted analytic values.
inline CrossCheckReport cross_check_against(
    const std::vector<MinerValue>& analytic_p_mining, double analytic_p_orphan,
    const BlockchainParams& params, const std::vector<MinerValue>& demands,
    const McConfig& mc) {
  const auto win_freq = simulate_mining_winners(demands, mc);
  const double orphan_freq = simulate_orphaning(params, mc);
  const double trials = static_cast<double>(mc.trials);
  CrossCheckReport report;
  auto add = [&](std::string quantity, double analytic, double empirical,
                 double bound) {
    CrossCheckEntry e{std::move(quantity), analytic, empirical, bound,
                      std::abs(analytic - empirical) <= bound};
    report.pass = report.pass && e.pass;
    report.entries.push_back(std::move(e));
  };

  auto binomial_sigma = [&](double p) {
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / trials);
  };
  for (std::size_t i = 0; i < analytic_p_mining.size(); ++i) {
    const auto& m = analytic_p_mining[i];
    add("p_mining[" + std::to_string(m.user_id) + "]", m.value,
        win_freq[i].value, 3.0 * binomial_sigma(m.value));
  }
  add("p_orphan", analytic_p_orphan, orphan_freq,
      3.0 * binomial_sigma(analytic_p_orphan));

  // Rewards combine two independent frequencies; the bound is the
  // first-order (delta-method) propagation of both binomial variances.
  const double block_reward =
      params.r_const + static_cast<double>(params.n_trans) * params.r_trans;
  const double survival = 1.0 - analytic_p_orphan;
  const double var_s = analytic_p_orphan * (1.0 - analytic_p_orphan) / trials;
  for (std::size_t i = 0; i < analytic_p_mining.size(); ++i) {
    const auto& m = analytic_p_mining[i];
    const double var_f = m.value * (1.0 - m.value) / trials;
    const double var =
        survival * survival * var_f + m.value * m.value * var_s;
    add("r_mining[" + std::to_string(m.user_id) + "]",
        m.value * block_reward * survival,
        win_freq[i].value * block_reward * (1.0 - orphan_freq),
        3.0 * block_reward * std::sqrt(var));
  }
  return report;
}

inline CrossCheckReport cross_check(const Instance& instance,
                                    const McConfig& mc) {
  const WorkloadPlan plan = build_workload(instance);
  return cross_check_against(p_mining(plan), p_orphan(instance.params),
                             instance.params, mining_demand_totals(plan), mc);
}

}  // namespace bfv
