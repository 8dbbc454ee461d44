#include <doctest.h>

#include <numeric>
#include <random>

#include "dpos/baselines.hpp"
#include "dpos/oracle.hpp"
#include "dpos/workload.hpp"
#include "helpers.hpp"

using namespace dpos;

namespace {

std::vector<std::size_t> identity(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

bool feasible(const Instance& inst, const std::vector<bool>& accepted) {
  for (std::size_t c = 0; c < inst.resources(); ++c) {
    double load = 0.0;
    for (std::size_t n = 0; n < inst.tenants(); ++n) {
      if (accepted[n]) load += inst.demands(n, c);
    }
    if (load > 1.0 + 1e-12) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("SCPA takes the largest bid that fits") {
  const BaselineResult r = scpa_adapted(testing::two_tenant());
  CHECK(r.accepted == std::vector<bool>{false, true});
  CHECK(r.welfare == doctest::Approx(1.2));
  CHECK(r.payments == std::vector<double>{0.0, 1.5});
  CHECK(r.utilization[0] == doctest::Approx(0.6));
}

TEST_CASE("myopic ramp starts free") {
  const Instance inst = testing::two_tenant();
  const SessionResult s = myopic_slicing(inst, identity(2));
  REQUIRE(s.ledger.transcript.size() == 2);
  CHECK(s.ledger.transcript[0].quote.prices[0] == 0.0);
  CHECK(s.ledger.transcript[0].outcome.status == SettleStatus::succ);
  CHECK(s.payments[0] == 0.0);

  // Zero-value tenant declines even at price zero.
  const Instance zero = testing::instance(testing::setup({0.5}, {1.0}, {2.0}), {{0.3}}, {0.0});
  CHECK_FALSE(myopic_slicing(zero, identity(1)).allocation.accepted[0]);
}

TEST_CASE("random slicing is seeded and feasible") {
  GenConfig g;
  g.tenants = 80;
  g.resources = 3;
  g.demand_mean = 3.0 / 80.0;
  g.seed = 5;
  const Instance inst = generate_instance(g);
  const auto order = identity(80);
  const BaselineResult a = random_slicing(inst, order, 9);
  CHECK(a.accepted == random_slicing(inst, order, 9).accepted);
  CHECK(feasible(inst, a.accepted));
  CHECK(a.welfare == doctest::Approx(social_welfare(inst, make_allocation(inst, a.accepted))));
  const auto count = std::count(a.accepted.begin(), a.accepted.end(), true);
  CHECK(count > 0);
  CHECK(count < 80);
}

TEST_CASE("GA stays close to the exact optimum on small instances") {
  std::mt19937_64 rng(31);
  int close = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    GenConfig g;
    g.tenants = 4 + rng() % 9;
    g.resources = 1 + rng() % 3;
    g.demand_mean = 2.0 / static_cast<double>(g.tenants);
    g.demand_std = 0.7 / static_cast<double>(g.tenants);
    g.seed = rng();
    const Instance inst = generate_instance(g);
    GaParams params;
    params.seed = rng();
    const BaselineResult ga = ga_heuristic(inst, params);
    const double best = offline_exact(inst).objective;
    CHECK(feasible(inst, ga.accepted));
    CHECK(ga.welfare <= best + 1e-9);
    if (ga.welfare >= 0.95 * best) ++close;
  }
  CHECK(close >= 90);
}

TEST_CASE("GA is deterministic for a seed") {
  GenConfig g;
  g.tenants = 30;
  g.resources = 2;
  g.seed = 12;
  const Instance inst = generate_instance(g);
  GaParams p;
  p.seed = 4;
  p.generations = 40;
  CHECK(ga_heuristic(inst, p).accepted == ga_heuristic(inst, p).accepted);
}

TEST_CASE("all baselines respect capacity") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    GenConfig g;
    g.tenants = 5 + seed * 3;
    g.resources = 1 + seed % 4;
    g.demand_mean = 4.0 / static_cast<double>(g.tenants);
    g.seed = seed;
    const Instance inst = generate_instance(g);
    const auto order = identity(inst.tenants());
    GaParams p;
    p.seed = seed;
    p.generations = 30;
    INFO("seed " << seed);
    CHECK(feasible(inst, ga_heuristic(inst, p).accepted));
    CHECK(feasible(inst, scpa_adapted(inst).accepted));
    CHECK(feasible(inst, random_slicing(inst, order, seed).accepted));
    CHECK(feasible(inst, myopic_slicing(inst, order).allocation.accepted));
  }
}
