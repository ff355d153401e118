#pragma once

// Shared fixtures for the test suite.

#include <random>
#include <stdexcept>
#include <vector>

#include <bfv/bfv.hpp>

namespace test {

inline bfv::Instance make_instance(std::vector<bfv::Server> servers,
                                   std::vector<bfv::UserDevice> users,
                                   bfv::BlockchainParams params = {},
                                   bfv::CostTable costs = {}) {
  bfv::ValidationResult r = bfv::validate_instance(
      bfv::ServerGraph{std::move(servers), {}}, users, params, costs);
  if (!r.ok()) throw std::logic_error("test fixture failed validation");
  return *r.instance;
}

inline bfv::UserDevice mobile_user(std::int64_t id, bool miner = true,
                                   bool tx_generator = false) {
  return bfv::make_default_user(id, bfv::DeviceClass::MobileUser, miner,
                                tx_generator);
}

inline bfv::UserDevice iot_user(std::int64_t id, bool miner = false,
                                bool tx_generator = true) {
  return bfv::make_default_user(id, bfv::DeviceClass::IoTSensor, miner,
                                tx_generator);
}

// Two servers (125 W and 250 W at 5 GHz), one mobile miner+generator, small
// block so everything fits inside one interval.
inline bfv::Instance micro_instance() {
  bfv::BlockchainParams params;
  params.t_th_s = 2.0;
  params.n_trans = 500;
  return make_instance({{1, 5e9, 125.0}, {2, 5e9, 250.0}},
                       {mobile_user(1, true, true)}, params);
}

// Random instance that is feasible by construction: the deadline is set to
// cover a sampled witness placement with 10% headroom, which also leaves
// every per-server budget slack under that witness. Population sizes keep
// the exhaustive search space under the solver guard.
inline bfv::Instance random_feasible_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> server_count(2, 4);
  std::uniform_real_distribution<double> cap(1e9, 6e9);
  std::uniform_real_distribution<double> pow_w(50.0, 300.0);
  std::uniform_int_distribution<int> ntr(100, 2000);
  std::uniform_int_distribution<int> extra(0, 2);

  const int s = server_count(rng);
  std::vector<bfv::Server> servers;
  for (int i = 0; i < s; ++i)
    servers.push_back({10 + ((i * 7) % s) * 3, cap(rng), pow_w(rng)});

  const int miners = s == 4 ? 1 : 1 + extra(rng) % 2;
  const int generators = extra(rng);
  std::vector<bfv::UserDevice> users;
  for (int i = 0; i < miners; ++i)
    users.push_back(mobile_user(1 + i, true, false));
  for (int i = 0; i < generators; ++i)
    users.push_back(iot_user(100 + i, false, true));

  bfv::BlockchainParams params;
  params.n_trans = ntr(rng);
  params.r_const = 0.01;
  params.r_trans = 1e-6;

  bfv::Instance inst = make_instance(servers, users, params);
  const bfv::WorkloadPlan plan = bfv::build_workload(inst);

  bfv::Placement witness;
  std::uniform_int_distribution<int> pick(0, s - 1);
  for (int d = 0; d < plan.demand_count(); ++d)
    witness.server_ids.push_back(servers[pick(rng)].id);

  inst.params.t_th_s = bfv::t_ran(plan, inst.users) +
                       1.1 * bfv::t_mec(witness, plan, inst.graph);
  return inst;
}

}  // namespace test
