#include <doctest.h>

#include <cmath>

#include "dpos/harness.hpp"
#include "dpos/oracle.hpp"
#include "dpos/pricing.hpp"
#include "dpos/protocol.hpp"
#include "dpos/verify.hpp"
#include "dpos/workload.hpp"
#include "helpers.hpp"

using namespace dpos;
using testing::error_code;

namespace {

PriceQuote quote_of(std::vector<double> prices) { return PriceQuote{1, std::move(prices)}; }

std::vector<std::size_t> identity(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST_CASE("initial ledger posts the floor prices") {
  const PricingSchedule e1(testing::e1_setup());
  const SessionLedger a = mvno_init(e1);
  CHECK(a.utilization == std::vector<double>{0.0});
  CHECK(a.prices == std::vector<double>{2.0});

  const SessionLedger b = mvno_init(PricingSchedule(testing::e2_setup()));
  CHECK(b.prices == std::vector<double>{1.0, 2.0});

  const MarketSetup m = testing::setup({0.3, 0.9, 0.1}, {0.7, 1.1, 0.45}, {2.0, 1.5, 3.0});
  CHECK(mvno_init(PricingSchedule(m)).prices == m.lower_bounds);
}

TEST_CASE("tenant decision rule") {
  const std::vector<double> d{0.1, 0.2};
  const TenantResponse yes = tenant_decide(quote_of({2.0, 2.5}), 1.2, d);
  CHECK(yes.decision.accept);
  CHECK(yes.decision.payment == doctest::Approx(0.7));
  CHECK(yes.surplus == doctest::Approx(0.5));
  CHECK(yes.decision.demand == d);

  const TenantResponse no = tenant_decide(quote_of({2.0, 2.5}), 0.6, d);
  CHECK_FALSE(no.decision.accept);
  CHECK(no.decision.payment == 0.0);
  CHECK(no.decision.demand == std::vector<double>{0.0, 0.0});
  CHECK(no.surplus == 0.0);

  // Zero utility is a decline.
  const std::vector<double> d1{0.3};
  const TenantResponse tie = tenant_decide(quote_of({2.0}), 0.6, d1);
  CHECK_FALSE(tie.decision.accept);

  const std::vector<double> neg{-0.1};
  CHECK(error_code([&] { (void)tenant_decide(quote_of({2.0}), 1.0, neg); }) == Errc::invalid_argument);
  CHECK(error_code([&] { (void)tenant_decide(quote_of({2.0}), -1.0, d1); }) == Errc::invalid_argument);
  CHECK(error_code([&] { (void)tenant_decide(quote_of({2.0}), 1.0, d); }) == Errc::invalid_argument);
}

TEST_CASE("settlement outcomes") {
  const PricingSchedule e1(testing::e1_setup());

  SUBCASE("overflow fails and refunds") {
    SessionLedger ledger = mvno_init(e1);
    ledger.utilization = {0.95};
    ledger.prices = {e1.price_at(0, 0.95).value()};
    const PriceQuote q = mvno_quote(ledger);
    const std::vector<double> d{0.1};
    const TenantResponse r = tenant_decide(q, 100.0, d);
    REQUIRE(r.decision.accept);
    const TransactionOutcome out = mvno_settle(ledger, e1, r.decision);
    CHECK(out.status == SettleStatus::fail);
    CHECK(out.refund == r.decision.payment);
    CHECK(ledger.utilization == std::vector<double>{0.95});
    CHECK(ledger.revenue == 0.0);
  }

  SUBCASE("fitting request succeeds at the threshold") {
    SessionLedger ledger = mvno_init(e1);
    ledger.utilization = {0.4};
    const PriceQuote q = mvno_quote(ledger);
    const std::vector<double> d{0.1};
    const TenantResponse r = tenant_decide(q, 1.0, d);
    const TransactionOutcome out = mvno_settle(ledger, e1, r.decision);
    CHECK(out.status == SettleStatus::succ);
    CHECK(out.refund == 0.0);
    CHECK(ledger.utilization[0] == doctest::Approx(0.5));
    CHECK(ledger.prices[0] == doctest::Approx(2.0));
    CHECK(ledger.revenue == doctest::Approx(0.2));
  }

  SUBCASE("decline skips") {
    SessionLedger ledger = mvno_init(e1);
    (void)mvno_quote(ledger);
    const TransactionOutcome out = mvno_settle(ledger, e1, RentDecision{false, 0.0, {0.0}});
    CHECK(out.status == SettleStatus::skip);
    CHECK(ledger.utilization == std::vector<double>{0.0});
    CHECK(ledger.transcript.size() == 1);
  }

  SUBCASE("protocol violations") {
    SessionLedger ledger = mvno_init(e1);
    CHECK(error_code([&] { (void)mvno_settle(ledger, e1, RentDecision{false, 0.0, {0.0}}); }) ==
          Errc::protocol_violation);
    (void)mvno_quote(ledger);
    CHECK(error_code([&] { (void)mvno_quote(ledger); }) == Errc::protocol_violation);
    CHECK(error_code([&] { (void)mvno_settle(ledger, e1, RentDecision{true, 0.1, {0.1}}); }) ==
          Errc::protocol_violation);
    (void)mvno_quote(ledger);
    CHECK(error_code([&] { (void)mvno_settle(ledger, e1, RentDecision{false, 0.5, {0.0}}); }) ==
          Errc::protocol_violation);
  }
}

TEST_CASE("agents talk over a duplex channel") {
  const PricingSchedule e1(testing::e1_setup());
  MvnoAgent mvno(e1, true);
  DuplexChannel link;
  const std::vector<double> d{0.3};
  TenantAgent tenant(0.9, d);
  mvno.publish(link);
  tenant.respond(link);
  CHECK(mvno.settle(link).status == SettleStatus::succ);
  tenant.receive_outcome(link);
  REQUIRE(tenant.outcome().has_value());
  CHECK(tenant.outcome()->status == SettleStatus::succ);
  CHECK(tenant.payment() == doctest::Approx(0.6));
  CHECK(tenant.surplus() == doctest::Approx(0.3));
  CHECK(link.to_tenant.empty());
  CHECK(link.to_mvno.empty());
  CHECK(mvno.ledger().transcript.size() == 1);
}

TEST_CASE("sessions") {
  const PricingSchedule e1(testing::e1_setup());

  SUBCASE("no tenants") {
    const Instance empty = testing::instance(testing::e1_setup(), {}, {});
    const SessionResult r = run_session(empty, e1, {});
    CHECK(r.allocation.accepted.empty());
    CHECK(social_welfare(empty, r.allocation) == 0.0);
  }

  SUBCASE("single arrival") {
    const Instance one = testing::instance(testing::e1_setup(), {{0.3}}, {0.9});
    const auto order = identity(1);
    const SessionResult r = run_session(one, e1, order);
    REQUIRE(r.ledger.transcript.size() == 1);
    CHECK(r.ledger.transcript[0].quote.prices[0] == 2.0);
    CHECK(r.ledger.transcript[0].decision.payment == doctest::Approx(0.6));
    CHECK(r.allocation.accepted[0]);
    CHECK(social_welfare(one, r.allocation) == doctest::Approx(0.6));
    CHECK(r.payments[0] == doctest::Approx(0.6));
  }

  SUBCASE("order must be a permutation") {
    const Instance two = testing::two_tenant();
    const PricingSchedule s(two.market);
    const std::vector<std::size_t> dup{0, 0}, short_order{0};
    CHECK(error_code([&] { (void)run_session(two, s, dup); }) == Errc::invalid_argument);
    CHECK(error_code([&] { (void)run_session(two, s, short_order); }) == Errc::invalid_argument);
  }

  SUBCASE("density floor screening") {
    // Tenant 0 has density 1.0 < floor 2.0 and is skipped unquoted.
    const Instance inst = testing::instance(testing::e1_setup(), {{0.5}, {0.2}}, {0.5, 0.6});
    const auto order = identity(2);
    const SessionResult r = run_session(inst, e1, order, {true, true});
    CHECK(r.ledger.transcript[0].outcome.status == SettleStatus::skip);
    CHECK_FALSE(r.ledger.transcript[0].decision.accept);
    CHECK(r.allocation.accepted == std::vector<bool>{false, true});
  }
}

TEST_CASE("seeded ten-tenant session against the exhaustive optimum") {
  GenConfig config;
  config.tenants = 10;
  config.resources = 2;
  config.seed = 1;
  const Instance inst = generate_instance(config);
  const PricingSchedule s(inst.market);
  const auto order = arrival_order(10, 1);
  const SessionResult r = run_session(inst, s, order);
  const double online = social_welfare(inst, r.allocation);
  const OracleResult best = offline_exact(inst, {ExactOptions::Path::exhaustive});
  CHECK(online <= best.objective + 1e-12);
  // Weak duality: the certificate bounds the offline optimum.
  CHECK(dual_objective(inst, r.certificate) >= best.objective - 1e-12);
  CHECK(dual_violations(inst, r.certificate).empty());
  CHECK(session_violations(inst, s, order, r).empty());
  if (online > 0.0) {
    CHECK(best.objective / online <= s.competitive_ratio());
  }
}

TEST_CASE("random sessions keep every invariant") {
  const SuiteReport report = check_session_invariants(300, 11);
  INFO(report.summary());
  CHECK(report.ok());
  CHECK(report.cases == 300);
}
