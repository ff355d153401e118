#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace bfv;

namespace {

int count_code(const ValidationResult& r, ValidationCode code) {
  int n = 0;
  for (const auto& issue : r.issues) n += issue.code == code ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("defaults validate cleanly") {
  const auto r = validate_instance(
      ServerGraph{make_default_servers(3), {}}, make_default_users(3),
      BlockchainParams{}, CostTable{});
  REQUIRE(r.ok());
  REQUIRE(r.issues.empty());
  REQUIRE(r.instance->graph.servers.size() == 3);
  REQUIRE(r.instance->users.size() == 3);
}

TEST_CASE("duplicate ids are rejected") {
  auto servers = make_default_servers(2);
  servers[1].id = servers[0].id;
  auto r = validate_instance(ServerGraph{servers, {}}, make_default_users(2),
                             {}, {});
  REQUIRE_FALSE(r.ok());
  REQUIRE(count_code(r, ValidationCode::DuplicateId) == 1);

  auto users = make_default_users(2);
  users[1].id = users[0].id;
  r = validate_instance(ServerGraph{make_default_servers(2), {}}, users, {},
                        {});
  REQUIRE_FALSE(r.ok());
  REQUIRE(count_code(r, ValidationCode::DuplicateId) == 1);
}

TEST_CASE("non-positive quantities are rejected") {
  auto servers = make_default_servers(1);
  servers[0].capacity_hz = 0.0;
  const auto r = validate_instance(ServerGraph{servers, {}},
                                   make_default_users(1), {}, {});
  REQUIRE_FALSE(r.ok());
  REQUIRE(count_code(r, ValidationCode::NonPositiveQuantity) == 1);
  REQUIRE_THAT(r.issues[0].message,
               Catch::Matchers::ContainsSubstring("capacity_hz"));
}

TEST_CASE("empty server graph is rejected") {
  const auto r =
      validate_instance(ServerGraph{}, make_default_users(1), {}, {});
  REQUIRE_FALSE(r.ok());
  REQUIRE(count_code(r, ValidationCode::NonPositiveQuantity) >= 1);
}

TEST_CASE("links must join existing distinct servers") {
  const auto servers = make_default_servers(2);
  auto r = validate_instance(ServerGraph{servers, {{1, 9, 0.0}}},
                             make_default_users(1), {}, {});
  REQUIRE_FALSE(r.ok());
  REQUIRE(count_code(r, ValidationCode::DanglingLinkEndpoint) == 1);

  r = validate_instance(ServerGraph{servers, {{1, 1, 0.0}}},
                        make_default_users(1), {}, {});
  REQUIRE(count_code(r, ValidationCode::DanglingLinkEndpoint) == 1);

  r = validate_instance(ServerGraph{servers, {{1, 2, -0.5}}},
                        make_default_users(1), {}, {});
  REQUIRE(count_code(r, ValidationCode::NonPositiveQuantity) == 1);

  r = validate_instance(ServerGraph{servers, {{1, 2, 0.001}}},
                        make_default_users(1), {}, {});
  REQUIRE(r.ok());
}

TEST_CASE("role flags are enforced") {
  auto users = make_default_users(2);
  users[0].is_miner = false;
  users[0].is_tx_generator = false;
  auto r = validate_instance(ServerGraph{make_default_servers(1), {}}, users,
                             {}, {});
  REQUIRE_FALSE(r.ok());
  REQUIRE(count_code(r, ValidationCode::MissingRole) == 1);

  for (auto& u : users) {
    u.is_miner = false;
    u.is_tx_generator = true;
  }
  r = validate_instance(ServerGraph{make_default_servers(1), {}}, users, {},
                        {});
  REQUIRE_FALSE(r.ok());
  REQUIRE(count_code(r, ValidationCode::NoMiners) == 1);
}

TEST_CASE("parameter ranges are enforced") {
  BlockchainParams params;
  params.n_trans = 0;
  params.tx_size_bytes = 0.5;
  params.t_th_s = 0.0;
  const auto r = validate_instance(ServerGraph{make_default_servers(1), {}},
                                   make_default_users(1), params, {});
  REQUIRE_FALSE(r.ok());
  REQUIRE(count_code(r, ValidationCode::NonPositiveQuantity) == 3);
}

TEST_CASE("cost table must be nonnegative") {
  CostTable costs;
  costs.mining_cycles = -1.0;
  const auto r = validate_instance(ServerGraph{make_default_servers(1), {}},
                                   make_default_users(1), {}, costs);
  REQUIRE_FALSE(r.ok());
  REQUIRE(count_code(r, ValidationCode::NonPositiveQuantity) == 1);
}

TEST_CASE("all violations are collected in one pass") {
  auto servers = make_default_servers(2);
  servers[1].id = servers[0].id;
  servers[0].power_w = -1.0;
  auto users = make_default_users(1);
  users[0].is_miner = false;
  users[0].is_tx_generator = false;
  const auto r = validate_instance(ServerGraph{servers, {{5, 6, 0.0}}}, users,
                                   {}, {});
  REQUIRE_FALSE(r.ok());
  REQUIRE(count_code(r, ValidationCode::DuplicateId) == 1);
  REQUIRE(count_code(r, ValidationCode::NonPositiveQuantity) == 1);
  REQUIRE(count_code(r, ValidationCode::DanglingLinkEndpoint) == 2);
  REQUIRE(count_code(r, ValidationCode::MissingRole) == 1);
  REQUIRE(count_code(r, ValidationCode::NoMiners) == 1);
  REQUIRE(!r.instance.has_value());
}

TEST_CASE("graph lookups") {
  const ServerGraph g{make_default_servers(3), {}};
  REQUIRE(g.find(2) != nullptr);
  REQUIRE(g.find(2)->id == 2);
  REQUIRE(g.find(9) == nullptr);
  REQUIRE(g.index_of(3) == 2);
  REQUIRE(g.index_of(9) == -1);
}

TEST_CASE("block body size") {
  BlockchainParams p;
  REQUIRE(block_body_bytes(p) == 1e6);
  p.n_trans = 1;
  p.tx_size_bytes = 1.0;
  REQUIRE(block_body_bytes(p) == 1.0);
}

TEST_CASE("broadcast classification") {
  REQUIRE(is_broadcast(FunctionKind::TxBroadcast));
  REQUIRE(is_broadcast(FunctionKind::BlockBroadcast));
  REQUIRE_FALSE(is_broadcast(FunctionKind::Mining));
  REQUIRE_FALSE(is_broadcast(FunctionKind::ChainAppend));
}
