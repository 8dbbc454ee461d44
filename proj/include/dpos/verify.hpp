#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpos/protocol.hpp"

namespace dpos {

struct CheckFailure {
  std::uint64_t seed = 0;
  std::string what;
};

/// Outcome of one randomized invariant suite. Only the first few failures
/// are kept verbatim; `failed_cases` counts all of them.
struct SuiteReport {
  std::string name;
  std::size_t cases = 0;
  std::size_t failed_cases = 0;
  std::size_t skipped = 0;  // cases outside the property's premise
  std::vector<CheckFailure> failures;
  double seconds = 0.0;

  bool ok() const { return failed_cases == 0; }
  std::string summary() const;
};

/// Checks one finished session against its instance: capacity after every
/// step, non-decreasing quotes that match the rule, refunds on FAIL, dual
/// feasibility, and the accounting identity
/// welfare = MVNO utility + sum of tenant utilities. Returns the violations.
std::vector<std::string> session_violations(const Instance& instance, const PriceRule& rule,
                                            std::span<const std::size_t> order, const SessionResult& result,
                                            double tol = 1e-9);

/// Random instances (N in 1..60, C in 1..6, demand scale varied so FAIL
/// occurs) run through the posted-price session.
SuiteReport check_session_invariants(std::size_t sessions, std::uint64_t seed);

/// phi_c(1) = sum_c' upper_c' - sum_{c' != c} q_c' on random setups, C in 1..9.
SuiteReport check_terminal_identity(std::size_t setups, std::uint64_t seed, double rel_tol = 1e-9);

/// Offline optimum <= alpha * session welfare on small instances solved
/// exhaustively (N <= max_tenants, C <= max_resources). Instances whose
/// session welfare is zero are counted as skipped.
SuiteReport check_competitive_bound(std::size_t instances, std::uint64_t seed, std::size_t max_tenants = 12,
                                    std::size_t max_resources = 3);

/// Branch-and-bound agrees with exhaustive search, and the LP value is never
/// below the exact optimum.
SuiteReport check_oracle_agreement(std::size_t instances, std::uint64_t seed, std::size_t max_tenants = 12);

/// Recorded transcripts validate; the same lines with a leaked private field
/// (valuation, surplus or raw demand profile) do not.
SuiteReport check_transcript_schema(std::size_t sessions, std::uint64_t seed);

}  // namespace dpos
