#include "dpos/protocol.hpp"

#include <cmath>
#include <string>

namespace dpos {

std::string_view to_string(SettleStatus s) noexcept {
  switch (s) {
    case SettleStatus::succ: return "SUCC";
    case SettleStatus::fail: return "FAIL";
    case SettleStatus::skip: return "SKIP";
  }
  return "SKIP";
}

SettleStatus parse_settle_status(std::string_view s) {
  if (s == "SUCC") return SettleStatus::succ;
  if (s == "FAIL") return SettleStatus::fail;
  if (s == "SKIP") return SettleStatus::skip;
  throw Error(Errc::validation, "unknown outcome '" + std::string(s) + "'");
}

namespace {

void refresh_prices(SessionLedger& ledger, const PriceRule& rule) {
  for (std::size_t c = 0; c < ledger.utilization.size(); ++c) {
    // utilization never exceeds 1, so the quote is always finite
    ledger.prices[c] = rule.price_at(c, ledger.utilization[c]).value();
  }
}

double quoted_payment(const PriceQuote& quote, std::span<const double> demand) {
  double pay = 0.0;
  for (std::size_t c = 0; c < demand.size(); ++c) pay += demand[c] * quote.prices[c];
  return pay;
}

}  // namespace

SessionLedger mvno_init(const PriceRule& rule) {
  const std::size_t C = rule.resource_count();
  SessionLedger ledger;
  ledger.utilization.assign(C, 0.0);
  ledger.prices.assign(C, 0.0);
  refresh_prices(ledger, rule);
  return ledger;
}

PriceQuote mvno_quote(SessionLedger& ledger) {
  if (ledger.pending) {
    throw Error(Errc::protocol_violation, "quote issued while a transaction is outstanding");
  }
  ledger.arrivals += 1;
  ledger.pending = PriceQuote{ledger.arrivals, ledger.prices};
  return *ledger.pending;
}

TenantResponse tenant_decide(const PriceQuote& quote, double valuation,
                             std::span<const double> demand) {
  if (!(valuation >= 0.0)) throw Error(Errc::invalid_argument, "valuation must be >= 0");
  if (demand.size() != quote.prices.size()) {
    throw Error(Errc::invalid_argument, "demand length does not match quoted resources");
  }
  for (std::size_t c = 0; c < demand.size(); ++c) {
    if (!(demand[c] >= 0.0)) throw Error(Errc::invalid_argument, "demand must be >= 0");
    if (!std::isfinite(quote.prices[c])) {
      throw Error(Errc::invalid_argument, "quoted price must be finite");
    }
  }
  const double payment = quoted_payment(quote, demand);
  const double utility = valuation - payment;
  TenantResponse r;
  if (utility > 0.0) {
    r.decision = RentDecision{true, payment, {demand.begin(), demand.end()}};
    r.surplus = utility;
  } else {
    r.decision = RentDecision{false, 0.0, std::vector<double>(demand.size(), 0.0)};
    r.surplus = 0.0;
  }
  return r;
}

TransactionOutcome mvno_settle(SessionLedger& ledger, const PriceRule& rule,
                               const RentDecision& decision) {
  if (!ledger.pending) throw Error(Errc::protocol_violation, "decision received without a quote");
  const PriceQuote quote = std::move(*ledger.pending);
  ledger.pending.reset();

  const std::size_t C = ledger.utilization.size();
  if (decision.demand.size() != C) {
    throw Error(Errc::protocol_violation, "decision demand vector has wrong length");
  }
  TransactionOutcome outcome;
  if (!decision.accept) {
    if (decision.payment != 0.0) {
      throw Error(Errc::protocol_violation, "declining tenant attached a payment");
    }
    for (double d : decision.demand) {
      if (d != 0.0) throw Error(Errc::protocol_violation, "declining tenant attached demand");
    }
    outcome = {SettleStatus::skip, 0.0};
  } else {
    for (double d : decision.demand) {
      if (!(d >= 0.0)) throw Error(Errc::protocol_violation, "negative demand in decision");
    }
    const double expected = quoted_payment(quote, decision.demand);
    if (std::abs(decision.payment - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw Error(Errc::protocol_violation, "payment " + std::to_string(decision.payment) +
                                                " does not match quoted total " +
                                                std::to_string(expected));
    }
    bool fits = true;
    for (std::size_t c = 0; c < C; ++c) {
      if (ledger.utilization[c] + decision.demand[c] > 1.0) {
        fits = false;
        break;
      }
    }
    if (fits) {
      for (std::size_t c = 0; c < C; ++c) ledger.utilization[c] += decision.demand[c];
      ledger.revenue += decision.payment;
      ledger.accepted_arrivals.push_back(quote.arrival);
      outcome = {SettleStatus::succ, 0.0};
    } else {
      outcome = {SettleStatus::fail, decision.payment};
    }
  }
  refresh_prices(ledger, rule);
  if (ledger.record_transcript) {
    ledger.transcript.push_back({quote, decision, outcome});
  }
  return outcome;
}

MvnoAgent::MvnoAgent(const PriceRule& rule, bool record_transcript)
    : rule_(&rule), ledger_(mvno_init(rule)) {
  ledger_.record_transcript = record_transcript;
}

void MvnoAgent::expect_arrivals(std::size_t n) {
  if (ledger_.record_transcript) ledger_.transcript.reserve(ledger_.transcript.size() + n);
}

void MvnoAgent::publish(DuplexChannel& link) { link.to_tenant.send(mvno_quote(ledger_)); }

TransactionOutcome MvnoAgent::settle(DuplexChannel& link) {
  auto decision = link.to_mvno.receive();
  if (!decision) throw Error(Errc::protocol_violation, "no decision on uplink");
  TransactionOutcome outcome = mvno_settle(ledger_, *rule_, *decision);
  if (outcome.status != SettleStatus::skip) link.to_tenant.send(outcome);
  return outcome;
}

void MvnoAgent::screen_out(DuplexChannel& link) {
  PriceQuote quote = mvno_quote(ledger_);
  link.to_mvno.send(RentDecision{false, 0.0, std::vector<double>(quote.prices.size(), 0.0)});
  settle(link);
}

TenantAgent::TenantAgent(double valuation, std::span<const double> demand)
    : valuation_(valuation), demand_(demand) {}

void TenantAgent::respond(DuplexChannel& link) {
  auto msg = link.to_tenant.receive();
  if (!msg || !std::holds_alternative<PriceQuote>(*msg)) {
    throw Error(Errc::protocol_violation, "tenant expected a price quote");
  }
  TenantResponse r = tenant_decide(std::get<PriceQuote>(*msg), valuation_, demand_);
  surplus_ = r.surplus;
  payment_ = r.decision.payment;
  link.to_mvno.send(std::move(r.decision));
}

void TenantAgent::receive_outcome(DuplexChannel& link) {
  auto msg = link.to_tenant.receive();
  if (!msg) {
    outcome_ = TransactionOutcome{SettleStatus::skip, 0.0};
    return;
  }
  if (!std::holds_alternative<TransactionOutcome>(*msg)) {
    throw Error(Errc::protocol_violation, "tenant expected a settlement outcome");
  }
  outcome_ = std::get<TransactionOutcome>(*msg);
}

SessionResult run_session(const Instance& instance, const PriceRule& rule,
                          std::span<const std::size_t> order, SessionOptions options) {
  const std::size_t N = instance.tenants();
  const std::size_t C = instance.resources();
  if (rule.resource_count() != C) {
    throw Error(Errc::invalid_argument, "price rule and instance disagree on resource count");
  }
  if (order.size() != N) throw Error(Errc::invalid_argument, "arrival order must cover every tenant");
  std::vector<bool> seen(N, false);
  for (std::size_t n : order) {
    if (n >= N || seen[n]) throw Error(Errc::invalid_argument, "arrival order is not a permutation");
    seen[n] = true;
  }

  MvnoAgent mvno(rule, options.record_transcript);
  mvno.expect_arrivals(N);
  DuplexChannel link;

  SessionResult result;
  result.certificate.surplus.assign(N, 0.0);
  result.payments.assign(N, 0.0);
  std::vector<bool> accepted(N, false);

  for (std::size_t n : order) {
    const auto demand = instance.demands.row(n);
    const double v = instance.valuations[n];
    if (options.enforce_density_floor) {
      bool below = false;
      for (std::size_t c = 0; c < C; ++c) {
        if (demand[c] > 0.0 && v / demand[c] < instance.market.lower_bounds[c]) below = true;
      }
      if (below) {
        mvno.screen_out(link);
        continue;
      }
    }
    TenantAgent tenant(v, demand);
    mvno.publish(link);
    tenant.respond(link);
    const TransactionOutcome outcome = mvno.settle(link);
    tenant.receive_outcome(link);

    result.certificate.surplus[n] = tenant.surplus();
    if (outcome.status == SettleStatus::succ) {
      accepted[n] = true;
      result.payments[n] = tenant.payment();
    }
  }

  result.ledger = mvno.take_ledger();
  result.certificate.final_prices = result.ledger.prices;
  result.allocation = make_allocation(instance, accepted);
  return result;
}

std::vector<std::size_t> dual_violations(const Instance& instance, const DualCertificate& cert,
                                         double tol) {
  std::vector<std::size_t> bad;
  for (std::size_t n = 0; n < instance.tenants(); ++n) {
    double priced = 0.0;
    for (std::size_t c = 0; c < instance.resources(); ++c) {
      priced += instance.demands(n, c) * cert.final_prices[c];
    }
    const double psi = cert.surplus[n];
    if (psi < -tol || psi < instance.valuations[n] - priced - tol) bad.push_back(n);
  }
  return bad;
}

double dual_objective(const Instance& instance, const DualCertificate& cert) {
  double total = 0.0;
  for (double psi : cert.surplus) total += psi;
  for (std::size_t c = 0; c < instance.resources(); ++c) {
    total += conjugate(instance.market, c, cert.final_prices[c]);
  }
  return total;
}

}  // namespace dpos
