#pragma once

// Core data model: server substrate, user devices, blockchain parameters,
// algorithm cost table, and whole-instance validation.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace bfv {

struct Server {
  std::int64_t id = 0;
  double capacity_hz = 0.0;  // processing capacity, CPU cycles per second
  double power_w = 0.0;      // power draw while processing
};

// Directed link between servers. Eq-level metrics carry no link terms, so the
// delay is informational; it is validated and serialized but never priced.
struct Link {
  std::int64_t src = 0;
  std::int64_t dst = 0;
  double delay_s = 0.0;
};

struct ServerGraph {
  std::vector<Server> servers;
  std::vector<Link> links;

  const Server* find(std::int64_t id) const {
    for (const auto& s : servers)
      if (s.id == id) return &s;
    return nullptr;
  }
  // Position of a server id in the `servers` vector, -1 if absent.
  int index_of(std::int64_t id) const {
    for (std::size_t i = 0; i < servers.size(); ++i)
      if (servers[i].id == id) return static_cast<int>(i);
    return -1;
  }
};

enum class DeviceClass { IoTSensor, MobileUser };

inline const char* to_string(DeviceClass c) {
  return c == DeviceClass::IoTSensor ? "iot_sensor" : "mobile_user";
}

struct UserDevice {
  std::int64_t id = 0;
  DeviceClass device_class = DeviceClass::MobileUser;
  double local_capacity_hz = 0.0;  // on-device CPU cycles per second
  double local_power_w = 0.0;      // on-device processing power (baseline only)
  double tx_power_w = 0.0;         // radio transmit power
  double uplink_rate_bps = 0.0;    // uplink data rate
  bool is_miner = false;
  bool is_tx_generator = false;
};

// The nine pipeline stages needed to add one block, in execution order.
enum class FunctionKind : int {
  TxGeneration = 0,
  TxBroadcast,
  Authentication,
  Verification,
  BlockGeneration,
  Mining,
  BlockBroadcast,
  BlockVerification,
  ChainAppend,
};

inline constexpr int kFunctionKindCount = 9;

inline const char* to_string(FunctionKind k) {
  switch (k) {
    case FunctionKind::TxGeneration: return "tx_generation";
    case FunctionKind::TxBroadcast: return "tx_broadcast";
    case FunctionKind::Authentication: return "authentication";
    case FunctionKind::Verification: return "verification";
    case FunctionKind::BlockGeneration: return "block_generation";
    case FunctionKind::Mining: return "mining";
    case FunctionKind::BlockBroadcast: return "block_broadcast";
    case FunctionKind::BlockVerification: return "block_verification";
    case FunctionKind::ChainAppend: return "chain_append";
  }
  return "unknown";
}

inline bool is_broadcast(FunctionKind k) {
  return k == FunctionKind::TxBroadcast || k == FunctionKind::BlockBroadcast;
}

// Block economics and timing. Defaults are the standard simulation setup;
// z_s_per_tx, r_const, r_trans, and header_bytes are modeling assumptions
// (documented in the README), the rest follow the usual parameter table.
struct BlockchainParams {
  double t_th_s = 1.0;        // block interval (deadline per block)
  double z_s_per_tx = 2e-5;   // network latency parameter, seconds per tx
  std::int64_t n_trans = 5000;  // transactions per block
  double tx_size_bytes = 200.0;
  double r_const = 12.5;      // constant mining reward
  double r_trans = 1e-3;      // per-transaction reward
  double header_bytes = 80.0; // block-header upload payload for mining requests
};

// Body bytes of one block.
inline double block_body_bytes(const BlockchainParams& p) {
  return static_cast<double>(p.n_trans) * p.tx_size_bytes;
}

// Per-algorithm CPU cycle prices and the gossip broadcast energy.
struct CostTable {
  double sha256_cycles_per_byte = 15.8;
  double rsa_cycles = 36e6;
  double ecdsa_cycles = 5.27e6;
  double block_auth_cycles_per_byte = 15.61;
  double merkle_multiplier = 15.0;   // applied to one SHA-256 pass over the body
  double mining_cycles = 0.25e9;
  double gossip_energy_j = 12.5;     // per broadcast event
};

enum class ValidationCode {
  DuplicateId,
  NonPositiveQuantity,
  DanglingLinkEndpoint,
  NoMiners,
  MissingRole,
};

inline const char* to_string(ValidationCode c) {
  switch (c) {
    case ValidationCode::DuplicateId: return "DuplicateId";
    case ValidationCode::NonPositiveQuantity: return "NonPositiveQuantity";
    case ValidationCode::DanglingLinkEndpoint: return "DanglingLinkEndpoint";
    case ValidationCode::NoMiners: return "NoMiners";
    case ValidationCode::MissingRole: return "MissingRole";
  }
  return "Unknown";
}

struct ValidationIssue {
  ValidationCode code;
  std::string message;
};

// A validated scenario instance. Immutable after validation by convention:
// every downstream consumer takes it by const reference.
struct Instance {
  ServerGraph graph;
  std::vector<UserDevice> users;
  BlockchainParams params;
  CostTable costs;
};

struct ValidationResult {
  std::optional<Instance> instance;
  std::vector<ValidationIssue> issues;

  bool ok() const { return instance.has_value(); }
};

namespace detail {

inline void require_positive(std::vector<ValidationIssue>& issues, double v,
                             const std::string& what) {
  if (!(v > 0.0))
    issues.push_back({ValidationCode::NonPositiveQuantity,
                      what + " must be > 0, got " + std::to_string(v)});
}

inline void require_nonnegative(std::vector<ValidationIssue>& issues, double v,
                                const std::string& what) {
  if (!(v >= 0.0))
    issues.push_back({ValidationCode::NonPositiveQuantity,
                      what + " must be >= 0, got " + std::to_string(v)});
}

}  // namespace detail

// Checks every type invariant and returns either a validated Instance or the
// complete list of violations. Total: never throws on bad input.
inline ValidationResult validate_instance(const ServerGraph& graph,
                                          const std::vector<UserDevice>& users,
                                          const BlockchainParams& params,
                                          const CostTable& costs) {
  using detail::require_nonnegative;
  using detail::require_positive;
  std::vector<ValidationIssue> issues;

  if (graph.servers.empty())
    issues.push_back({ValidationCode::NonPositiveQuantity,
                      "server graph must contain at least one server"});

  std::unordered_set<std::int64_t> server_ids;
  for (const auto& s : graph.servers) {
    const std::string tag = "server " + std::to_string(s.id);
    if (!server_ids.insert(s.id).second)
      issues.push_back({ValidationCode::DuplicateId, "duplicate " + tag});
    require_positive(issues, s.capacity_hz, tag + " capacity_hz");
    require_positive(issues, s.power_w, tag + " power_w");
  }

  for (const auto& l : graph.links) {
    const std::string tag =
        "link " + std::to_string(l.src) + "->" + std::to_string(l.dst);
    if (!server_ids.count(l.src))
      issues.push_back({ValidationCode::DanglingLinkEndpoint,
                        tag + ": src references no server"});
    if (!server_ids.count(l.dst))
      issues.push_back({ValidationCode::DanglingLinkEndpoint,
                        tag + ": dst references no server"});
    if (l.src == l.dst)
      issues.push_back({ValidationCode::DanglingLinkEndpoint,
                        tag + ": endpoints must be distinct"});
    require_nonnegative(issues, l.delay_s, tag + " delay_s");
  }

  std::unordered_set<std::int64_t> user_ids;
  bool any_miner = false;
  for (const auto& u : users) {
    const std::string tag = "user " + std::to_string(u.id);
    if (!user_ids.insert(u.id).second)
      issues.push_back({ValidationCode::DuplicateId, "duplicate " + tag});
    require_positive(issues, u.local_capacity_hz, tag + " local_capacity_hz");
    require_positive(issues, u.local_power_w, tag + " local_power_w");
    require_positive(issues, u.tx_power_w, tag + " tx_power_w");
    require_positive(issues, u.uplink_rate_bps, tag + " uplink_rate_bps");
    if (!u.is_miner && !u.is_tx_generator)
      issues.push_back({ValidationCode::MissingRole,
                        tag + " has neither is_miner nor is_tx_generator"});
    any_miner = any_miner || u.is_miner;
  }
  if (!any_miner)
    issues.push_back({ValidationCode::NoMiners, "no user has is_miner set"});

  require_positive(issues, params.t_th_s, "params.t_th_s");
  require_nonnegative(issues, params.z_s_per_tx, "params.z_s_per_tx");
  if (params.n_trans < 1)
    issues.push_back({ValidationCode::NonPositiveQuantity,
                      "params.n_trans must be >= 1, got " +
                          std::to_string(params.n_trans)});
  if (!(params.tx_size_bytes >= 1.0))
    issues.push_back({ValidationCode::NonPositiveQuantity,
                      "params.tx_size_bytes must be >= 1, got " +
                          std::to_string(params.tx_size_bytes)});
  require_nonnegative(issues, params.r_const, "params.r_const");
  require_nonnegative(issues, params.r_trans, "params.r_trans");
  require_nonnegative(issues, params.header_bytes, "params.header_bytes");

  require_nonnegative(issues, costs.sha256_cycles_per_byte,
                      "costs.sha256_cycles_per_byte");
  require_nonnegative(issues, costs.rsa_cycles, "costs.rsa_cycles");
  require_nonnegative(issues, costs.ecdsa_cycles, "costs.ecdsa_cycles");
  require_nonnegative(issues, costs.block_auth_cycles_per_byte,
                      "costs.block_auth_cycles_per_byte");
  require_nonnegative(issues, costs.merkle_multiplier,
                      "costs.merkle_multiplier");
  require_nonnegative(issues, costs.mining_cycles, "costs.mining_cycles");
  require_nonnegative(issues, costs.gossip_energy_j, "costs.gossip_energy_j");

  ValidationResult result;
  result.issues = std::move(issues);
  if (result.issues.empty())
    result.instance = Instance{graph, users, params, costs};
  return result;
}

}  // namespace bfv
