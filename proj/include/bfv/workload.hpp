#pragma once

// Translates the blockchain function pipeline plus the algorithm cost table
// into per-user function chains with CPU-cycle and byte demands.

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "bfv/domain.hpp"

namespace bfv {

struct FunctionDemand {
  std::int64_t user_id = 0;
  FunctionKind kind = FunctionKind::TxGeneration;
  double cycles = 0.0;
  double input_bytes = 0.0;   // uploaded by the user (chain head) or produced
                              // by the previous function
  double output_bytes = 0.0;  // handed to the next function
};

// One role's ordered slice of the pipeline for one user.
struct FunctionChain {
  std::int64_t user_id = 0;
  std::vector<FunctionDemand> demands;
};

// CPU cycles for one pipeline stage. Deterministic in (kind, costs, params).
inline double function_cycles(FunctionKind kind, const BlockchainParams& params,
                              const CostTable& costs) {
  const double body = block_body_bytes(params);
  switch (kind) {
    case FunctionKind::TxGeneration:
      return costs.rsa_cycles + costs.ecdsa_cycles +
             costs.sha256_cycles_per_byte * params.tx_size_bytes;
    case FunctionKind::TxBroadcast:
      return 0.0;  // gossip is priced in joules, not cycles
    case FunctionKind::Authentication:
      return costs.block_auth_cycles_per_byte * body;
    case FunctionKind::Verification:
      return costs.sha256_cycles_per_byte * body;
    case FunctionKind::BlockGeneration:
      return costs.merkle_multiplier * costs.sha256_cycles_per_byte * body;
    case FunctionKind::Mining:
      return costs.mining_cycles;
    case FunctionKind::BlockBroadcast:
      return 0.0;
    case FunctionKind::BlockVerification:
      return costs.sha256_cycles_per_byte * body;
    case FunctionKind::ChainAppend:
      // one hash pass over the body to splice the previous block's digest
      return costs.sha256_cycles_per_byte * body;
  }
  throw std::invalid_argument("unknown function kind");
}

namespace detail {

inline FunctionDemand make_demand(std::int64_t user_id, FunctionKind kind,
                                  const BlockchainParams& params,
                                  const CostTable& costs, double input_bytes,
                                  double output_bytes) {
  return FunctionDemand{user_id, kind, function_cycles(kind, params, costs),
                        input_bytes, output_bytes};
}

}  // namespace detail

// Chain for a transaction generator: generate, then broadcast.
inline FunctionChain build_tx_generator_chain(const UserDevice& user,
                                              const BlockchainParams& params,
                                              const CostTable& costs) {
  const double tx = params.tx_size_bytes;
  FunctionChain chain{user.id, {}};
  chain.demands.push_back(
      detail::make_demand(user.id, FunctionKind::TxGeneration, params, costs, tx, tx));
  chain.demands.push_back(
      detail::make_demand(user.id, FunctionKind::TxBroadcast, params, costs, tx, tx));
  return chain;
}

// Chain for a miner: authenticate and verify the pooled transactions, build
// the block, mine it, broadcast it. The miner's own upload is just the block
// generation request (header-sized); the transaction body is already in the
// network.
inline FunctionChain build_miner_chain(const UserDevice& user,
                                       const BlockchainParams& params,
                                       const CostTable& costs) {
  const double body = block_body_bytes(params);
  const double block = body + params.header_bytes;
  FunctionChain chain{user.id, {}};
  chain.demands.push_back(detail::make_demand(
      user.id, FunctionKind::Authentication, params, costs, params.header_bytes, body));
  chain.demands.push_back(detail::make_demand(
      user.id, FunctionKind::Verification, params, costs, body, body));
  chain.demands.push_back(detail::make_demand(
      user.id, FunctionKind::BlockGeneration, params, costs, body, block));
  chain.demands.push_back(detail::make_demand(
      user.id, FunctionKind::Mining, params, costs, block, block));
  chain.demands.push_back(detail::make_demand(
      user.id, FunctionKind::BlockBroadcast, params, costs, block, block));
  return chain;
}

// Chain for a block receiver: verify the incoming block and append it. The
// block arrives by gossip, not by user upload, so the head carries no upload
// payload.
inline FunctionChain build_receiver_chain(const UserDevice& user,
                                          const BlockchainParams& params,
                                          const CostTable& costs) {
  const double block = block_body_bytes(params) + params.header_bytes;
  FunctionChain chain{user.id, {}};
  chain.demands.push_back(detail::make_demand(
      user.id, FunctionKind::BlockVerification, params, costs, 0.0, block));
  chain.demands.push_back(detail::make_demand(
      user.id, FunctionKind::ChainAppend, params, costs, block, 0.0));
  return chain;
}

// One chain per role flag, in pipeline order (tx generation before mining).
inline std::vector<FunctionChain> build_chains(const UserDevice& user,
                                               const BlockchainParams& params,
                                               const CostTable& costs) {
  std::vector<FunctionChain> chains;
  if (user.is_tx_generator)
    chains.push_back(build_tx_generator_chain(user, params, costs));
  if (user.is_miner) chains.push_back(build_miner_chain(user, params, costs));
  return chains;
}

// One placeable demand in the flattened, canonically ordered demand list.
struct PlannedDemand {
  std::int64_t user_id = 0;
  int function_index = 0;  // position within the user's concatenated chains
  FunctionKind kind = FunctionKind::TxGeneration;
  double cycles = 0.0;
  double input_bytes = 0.0;
  double output_bytes = 0.0;
  bool chain_head = false;       // first function of its chain
  bool in_mining_chain = false;  // member of the user's miner chain
};

// Flattened workload over all users. Demand order is canonical: users in
// input order, each user's chains in (tx generator, miner) order, demands in
// chain order. This ordering defines the placement indexing everywhere.
struct WorkloadPlan {
  std::vector<FunctionChain> chains;
  std::vector<PlannedDemand> demands;

  int demand_count() const { return static_cast<int>(demands.size()); }

  // Uplink payload per user: the head input bytes of each of their chains.
  double uplink_payload_bytes(std::int64_t user_id) const {
    double bytes = 0.0;
    for (const auto& d : demands)
      if (d.user_id == user_id && d.chain_head) bytes += d.input_bytes;
    return bytes;
  }
};

inline WorkloadPlan plan_from_chains(const std::vector<FunctionChain>& chains,
                                     const std::vector<UserDevice>& users) {
  WorkloadPlan plan;
  plan.chains = chains;
  for (const auto& user : users) {
    int j = 0;
    for (const auto& chain : chains) {
      if (chain.user_id != user.id) continue;
      const bool mining_chain =
          std::any_of(chain.demands.begin(), chain.demands.end(),
                      [](const FunctionDemand& d) {
                        return d.kind == FunctionKind::Mining;
                      });
      for (std::size_t pos = 0; pos < chain.demands.size(); ++pos) {
        const auto& d = chain.demands[pos];
        plan.demands.push_back(PlannedDemand{d.user_id, j++, d.kind, d.cycles,
                                             d.input_bytes, d.output_bytes,
                                             pos == 0, mining_chain});
      }
    }
  }
  return plan;
}

inline WorkloadPlan build_workload(const Instance& instance) {
  std::vector<FunctionChain> chains;
  for (const auto& user : instance.users)
    for (auto& chain : build_chains(user, instance.params, instance.costs))
      chains.push_back(std::move(chain));
  return plan_from_chains(chains, instance.users);
}

}  // namespace bfv
