#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "dpos/market.hpp"
#include "dpos/pricing.hpp"

namespace dpos {

/// Prices published to the n-th arrival (1-based), before it decides.
struct PriceQuote {
  std::size_t arrival = 0;
  std::vector<double> prices;

  bool operator==(const PriceQuote&) const = default;
};

/// What a tenant sends back: (x, pi, d). A decline carries zero payment and
/// an all-zero demand vector.
struct RentDecision {
  bool accept = false;
  double payment = 0.0;
  std::vector<double> demand;

  bool operator==(const RentDecision&) const = default;
};

enum class SettleStatus { succ, fail, skip };

std::string_view to_string(SettleStatus s) noexcept;
SettleStatus parse_settle_status(std::string_view s);

struct TransactionOutcome {
  SettleStatus status = SettleStatus::skip;
  double refund = 0.0;  // equals the payment on FAIL, 0 otherwise

  bool operator==(const TransactionOutcome&) const = default;
};

struct TranscriptEntry {
  PriceQuote quote;
  RentDecision decision;
  TransactionOutcome outcome;

  bool operator==(const TranscriptEntry&) const = default;
};

/// Everything the MVNO knows. Nothing in here is derived from a tenant's
/// valuation; the only tenant-supplied data are the decision tuples.
struct SessionLedger {
  std::vector<double> utilization;
  std::vector<double> prices;
  std::vector<TranscriptEntry> transcript;
  double revenue = 0.0;
  std::vector<std::size_t> accepted_arrivals;  // 1-based arrival indices
  std::size_t arrivals = 0;
  bool record_transcript = true;
  std::optional<PriceQuote> pending;
};

/// Tenant-side reply plus its dual variable psi (non-negative surplus).
struct TenantResponse {
  RentDecision decision;
  double surplus = 0.0;
};

struct DualCertificate {
  std::vector<double> surplus;       // psi_n, indexed by tenant
  std::vector<double> final_prices;  // p^(N)
};

/// Zero utilization, prices at rule(0).
SessionLedger mvno_init(const PriceRule& rule);

/// Publishes the current prices to the next arrival and remembers the quote.
PriceQuote mvno_quote(SessionLedger& ledger);

/// Accept iff v - sum_c d_c p_c > 0 (strictly positive utility).
/// Throws Errc::invalid_argument on negative valuation/demand or a demand
/// vector whose length differs from the quote.
TenantResponse tenant_decide(const PriceQuote& quote, double valuation,
                             std::span<const double> demand);

/// Settles a decision against the outstanding quote: SKIP for a decline,
/// FAIL (with refund) when some resource would exceed capacity, SUCC
/// otherwise. Prices are recomputed from utilization afterwards. Throws
/// Errc::protocol_violation for malformed decisions or missing quotes.
TransactionOutcome mvno_settle(SessionLedger& ledger, const PriceRule& rule,
                               const RentDecision& decision);

/// Ordered, lossless in-process queue.
template <class Message>
class Channel {
public:
  void send(Message m) { queue_.push_back(std::move(m)); }
  std::optional<Message> receive() {
    if (queue_.empty()) return std::nullopt;
    Message m = std::move(queue_.front());
    queue_.pop_front();
    return m;
  }
  bool empty() const { return queue_.empty(); }

private:
  std::deque<Message> queue_;
};

using DownlinkMessage = std::variant<PriceQuote, TransactionOutcome>;

struct DuplexChannel {
  Channel<DownlinkMessage> to_tenant;
  Channel<RentDecision> to_mvno;
};

/// Seller side of the stop-and-wait exchange.
class MvnoAgent {
public:
  MvnoAgent(const PriceRule& rule, bool record_transcript);

  void publish(DuplexChannel& link);
  /// Consumes one decision from the uplink and answers with the outcome.
  TransactionOutcome settle(DuplexChannel& link);
  /// Declines an arrival without quoting it (density-floor screening).
  void screen_out(DuplexChannel& link);

  /// Reserves transcript space for a known number of arrivals.
  void expect_arrivals(std::size_t n);

  const SessionLedger& ledger() const { return ledger_; }
  SessionLedger take_ledger() { return std::move(ledger_); }

private:
  const PriceRule* rule_;
  SessionLedger ledger_;
};

/// Buyer side: holds the private valuation and the demand vector.
class TenantAgent {
public:
  TenantAgent(double valuation, std::span<const double> demand);

  void respond(DuplexChannel& link);
  void receive_outcome(DuplexChannel& link);

  double surplus() const { return surplus_; }
  double payment() const { return payment_; }
  const std::optional<TransactionOutcome>& outcome() const { return outcome_; }

private:
  double valuation_;
  std::span<const double> demand_;
  double surplus_ = 0.0;
  double payment_ = 0.0;
  std::optional<TransactionOutcome> outcome_;
};

struct SessionOptions {
  bool record_transcript = true;
  /// SKIP tenants with some earning density below the resource's lower
  /// bound, without quoting them.
  bool enforce_density_floor = false;
};

struct SessionResult {
  SessionLedger ledger;
  DualCertificate certificate;
  Allocation allocation;
  std::vector<double> payments;  // by tenant; FAIL/SKIP pay nothing
};

/// Runs every tenant through the exchange in the given arrival order. The
/// order must be a permutation of 0..N-1.
SessionResult run_session(const Instance& instance, const PriceRule& rule,
                          std::span<const std::size_t> order, SessionOptions options = {});

/// Indices of tenants whose dual constraint psi_n >= v_n - sum_c d p^(N)
/// (or psi_n >= 0) is violated by more than tol.
std::vector<std::size_t> dual_violations(const Instance& instance, const DualCertificate& cert,
                                         double tol = 1e-9);

/// sum_n psi_n + sum_c h_c(p_c): an upper bound on the offline optimum.
double dual_objective(const Instance& instance, const DualCertificate& cert);

}  // namespace dpos
