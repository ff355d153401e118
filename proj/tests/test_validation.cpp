#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace bfv;
using Catch::Matchers::WithinAbs;

TEST_CASE("a lone miner always wins") {
  McConfig mc;
  mc.trials = 100;
  const auto freq = simulate_mining_winners({{7, 1.0}}, mc);
  REQUIRE(freq.size() == 1);
  REQUIRE(freq[0].user_id == 7);
  REQUIRE(freq[0].value == 1.0);
}

TEST_CASE("equal miners split the wins evenly") {
  McConfig mc;
  mc.trials = 1'000'000;
  mc.seed = 12345;
  const auto freq = simulate_mining_winners({{1, 5e8}, {2, 5e8}}, mc);
  REQUIRE_THAT(freq[0].value, WithinAbs(0.5, 0.002));
  REQUIRE_THAT(freq[1].value, WithinAbs(0.5, 0.002));
  REQUIRE_THAT(freq[0].value + freq[1].value, WithinAbs(1.0, 1e-12));
}

TEST_CASE("win frequencies track demand shares") {
  McConfig mc;
  mc.trials = 200'000;
  mc.seed = 9;
  const auto freq = simulate_mining_winners({{1, 1e8}, {2, 3e8}}, mc);
  REQUIRE_THAT(freq[0].value, WithinAbs(0.25, 0.005));
  REQUIRE_THAT(freq[1].value, WithinAbs(0.75, 0.005));
}

TEST_CASE("degenerate simulation inputs are rejected") {
  McConfig mc;
  mc.trials = 10;
  REQUIRE_THROWS_AS(simulate_mining_winners({}, mc), NoMinersError);
  REQUIRE_THROWS_AS(simulate_mining_winners({{1, -1.0}}, mc),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(simulate_mining_winners({{1, 0.0}, {2, 0.0}}, mc),
                    std::invalid_argument);

  McConfig bad;
  bad.trials = 0;
  REQUIRE_THROWS_AS(simulate_mining_winners({{1, 1.0}}, bad),
                    std::invalid_argument);
  bad.trials = 4;
  bad.partitions = 0;
  REQUIRE_THROWS_AS(simulate_mining_winners({{1, 1.0}}, bad),
                    std::invalid_argument);
  bad.partitions = 8;  // more streams than trials
  REQUIRE_THROWS_AS(simulate_mining_winners({{1, 1.0}}, bad),
                    std::invalid_argument);
}

TEST_CASE("orphaning vanishes with instant propagation") {
  BlockchainParams p;
  p.z_s_per_tx = 0.0;
  McConfig mc;
  mc.trials = 10'000;
  REQUIRE(simulate_orphaning(p, mc) == 0.0);
}

TEST_CASE("orphaning saturates with huge propagation windows") {
  BlockchainParams p;
  p.z_s_per_tx = 1.0;  // a 5000 s window against a 1 s interval
  McConfig mc;
  mc.trials = 10'000;
  REQUIRE_THAT(simulate_orphaning(p, mc), WithinAbs(1.0, 1e-3));
}

TEST_CASE("empirical orphan rate approaches the analytic value") {
  const BlockchainParams p;  // analytic 0.0951626
  McConfig mc;
  mc.trials = 1'000'000;
  mc.seed = 31337;
  const double emp = simulate_orphaning(p, mc);
  // three-sigma band: 3 * sqrt(p(1-p)/T) ~ 0.00088
  REQUIRE_THAT(emp, WithinAbs(0.09516258196404048, 0.00088));
}

TEST_CASE("simulations are deterministic in the seed") {
  const BlockchainParams p;
  McConfig mc;
  mc.trials = 50'000;
  mc.seed = 4242;
  REQUIRE(simulate_orphaning(p, mc) == simulate_orphaning(p, mc));

  const auto a = simulate_mining_winners({{1, 1.0}, {2, 2.0}}, mc);
  const auto b = simulate_mining_winners({{1, 1.0}, {2, 2.0}}, mc);
  REQUIRE(a[0].value == b[0].value);
  REQUIRE(a[1].value == b[1].value);

  McConfig other = mc;
  other.seed = 4243;
  const auto c = simulate_mining_winners({{1, 1.0}, {2, 2.0}}, other);
  REQUIRE(a[0].value != c[0].value);
}

TEST_CASE("partitioned runs are deterministic and near the analytic value") {
  const BlockchainParams p;
  McConfig mc;
  mc.trials = 100'000;
  mc.seed = 7;
  mc.partitions = 4;
  const double a = simulate_orphaning(p, mc);
  const double b = simulate_orphaning(p, mc);
  REQUIRE(a == b);
  REQUIRE_THAT(a, WithinAbs(0.09516258196404048, 0.003));

  McConfig single = mc;
  single.partitions = 1;
  // different stream layout, same statistical answer
  REQUIRE(simulate_orphaning(p, single) != a);
}

TEST_CASE("cross-check passes on an honest model") {
  const Instance inst = test::make_instance(make_default_servers(2),
                                            make_default_users(10));
  McConfig mc;
  mc.trials = 100'000;
  mc.seed = 99;
  const auto report = cross_check(inst, mc);
  REQUIRE(report.pass);
  // 10 win rates, the orphan rate, 10 rewards
  REQUIRE(report.entries.size() == 21);
  for (const auto& e : report.entries) {
    REQUIRE(e.pass);
    REQUIRE(std::abs(e.empirical - e.analytic) <= e.bound);
  }
}

TEST_CASE("cross-check flags corrupted analytics") {
  const Instance inst = test::make_instance(make_default_servers(2),
                                            make_default_users(5));
  const auto plan = build_workload(inst);
  const auto demands = mining_demand_totals(plan);
  const auto shares = p_mining(plan);
  const double orphan = p_orphan(inst.params);

  McConfig mc;
  mc.trials = 200'000;
  mc.seed = 17;
  REQUIRE(cross_check_against(shares, orphan, inst.params, demands, mc).pass);

  const auto corrupted =
      cross_check_against(shares, orphan + 0.05, inst.params, demands, mc);
  REQUIRE_FALSE(corrupted.pass);
  bool orphan_failed = false;
  for (const auto& e : corrupted.entries)
    if (e.quantity == "p_orphan") orphan_failed = !e.pass;
  REQUIRE(orphan_failed);
}

TEST_CASE("a single trial is vacuously inside its three-sigma band") {
  const Instance inst = test::make_instance(make_default_servers(1),
                                            make_default_users(1));
  McConfig mc;
  mc.trials = 1;
  mc.seed = 0;
  const auto report = cross_check(inst, mc);
  REQUIRE(report.pass);
}

TEST_CASE("three-sigma bounds shrink with the square root of the trials") {
  const Instance inst = test::make_instance(make_default_servers(1),
                                            make_default_users(2));
  McConfig small, large;
  small.trials = 1'000;
  large.trials = 1'000'000;
  small.seed = large.seed = 5;
  const auto coarse = cross_check(inst, small);
  const auto fine = cross_check(inst, large);
  REQUIRE(coarse.pass);
  REQUIRE(fine.pass);
  for (std::size_t i = 0; i < coarse.entries.size(); ++i)
    REQUIRE_THAT(coarse.entries[i].bound / fine.entries[i].bound,
                 WithinAbs(std::sqrt(1000.0), 1e-6));
}

TEST_CASE("reward entries combine both simulations") {
  const Instance inst = test::make_instance(make_default_servers(1),
                                            make_default_users(3));
  McConfig mc;
  mc.trials = 50'000;
  const auto report = cross_check(inst, mc);
  int rewards_seen = 0;
  for (const auto& e : report.entries)
    if (e.quantity.rfind("r_mining[", 0) == 0) {
      ++rewards_seen;
      REQUIRE(e.bound > 0.0);
    }
  REQUIRE(rewards_seen == 3);
}
