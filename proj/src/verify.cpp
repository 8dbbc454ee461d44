#include "dpos/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "dpos/harness.hpp"
#include "dpos/oracle.hpp"
#include "dpos/pricing.hpp"
#include "dpos/transcript.hpp"
#include "dpos/workload.hpp"

namespace dpos {

namespace {

constexpr std::size_t kKeptFailures = 8;

class SuiteTimer {
public:
  explicit SuiteTimer(SuiteReport& report) : report_(report), start_(std::chrono::steady_clock::now()) {}
  void stop() {
    report_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  SuiteReport& report_;
  std::chrono::steady_clock::time_point start_;
};

void record(SuiteReport& report, std::uint64_t seed, const std::vector<std::string>& problems) {
  if (problems.empty()) return;
  ++report.failed_cases;
  if (report.failures.size() < kKeptFailures) {
    std::string joined;
    for (const auto& p : problems) joined += (joined.empty() ? "" : "; ") + p;
    report.failures.push_back({seed, joined});
  }
}

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Small random workload whose shape varies with the seed.
Instance random_instance(std::uint64_t seed, std::size_t max_tenants, std::size_t max_resources,
                         double max_demand_scale) {
  std::mt19937_64 rng(seed);
  GenConfig config;
  config.tenants = std::uniform_int_distribution<std::size_t>(1, max_tenants)(rng);
  config.resources = std::uniform_int_distribution<std::size_t>(1, max_resources)(rng);
  const double n = static_cast<double>(config.tenants);
  const double scale = std::uniform_real_distribution<double>(0.5, max_demand_scale)(rng);
  config.demand_mean = scale / n;
  config.demand_std = scale / (2.0 * n);
  config.participation = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
  config.seed = rng();
  return generate_instance(config);
}

}  // namespace

std::string SuiteReport::summary() const {
  std::ostringstream os;
  os << name << ": " << (cases - failed_cases - skipped) << "/" << (cases - skipped) << " cases passed";
  if (skipped > 0) os << " (" << skipped << " skipped)";
  os << " in " << seconds << " s";
  for (const CheckFailure& f : failures) os << "\n  seed " << f.seed << ": " << f.what;
  if (failed_cases > failures.size()) os << "\n  (" << failed_cases - failures.size() << " more)";
  return os.str();
}

std::vector<std::string> session_violations(const Instance& instance, const PriceRule& rule,
                                            std::span<const std::size_t> order, const SessionResult& result,
                                            double tol) {
  std::vector<std::string> out;
  const std::size_t N = instance.tenants();
  const std::size_t C = instance.resources();
  const auto& transcript = result.ledger.transcript;
  if (transcript.size() != N) {
    out.push_back("transcript has " + std::to_string(transcript.size()) + " entries for " + std::to_string(N) +
                  " arrivals");
    return out;
  }

  std::vector<double> y(C, 0.0);
  std::vector<double> previous(C, 0.0);
  double revenue = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const TranscriptEntry& e = transcript[k];
    const std::size_t n = order[k];
    const std::string at = "arrival " + std::to_string(k + 1) + ": ";
    if (e.quote.arrival != k + 1) out.push_back(at + "quote carries arrival " + std::to_string(e.quote.arrival));
    double priced = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double expected = rule.price_at(c, y[c]).value();
      if (!close(e.quote.prices[c], expected, tol)) {
        out.push_back(at + "quote " + num(e.quote.prices[c]) + " differs from rule " + num(expected));
      }
      if (k > 0 && e.quote.prices[c] < previous[c] - tol) out.push_back(at + "price decreased");
      previous[c] = e.quote.prices[c];
      priced += instance.demands(n, c) * e.quote.prices[c];
    }

    const double margin = instance.valuations[n] - priced;
    if (std::abs(margin) > tol * std::max(1.0, std::abs(priced)) && e.decision.accept != (margin > 0.0)) {
      out.push_back(at + "decision contradicts the strict acceptance rule");
    }

    if (!e.decision.accept) {
      if (e.outcome.status != SettleStatus::skip || e.outcome.refund != 0.0 || e.decision.payment != 0.0) {
        out.push_back(at + "declined arrival was not a clean SKIP");
      }
      continue;
    }
    if (!close(e.decision.payment, priced, tol)) out.push_back(at + "payment differs from quoted total");
    bool fits = true;
    for (std::size_t c = 0; c < C; ++c) fits = fits && y[c] + e.decision.demand[c] <= 1.0;
    if (fits) {
      if (e.outcome.status != SettleStatus::succ) out.push_back(at + "fitting request was not SUCC");
      if (e.outcome.refund != 0.0) out.push_back(at + "SUCC carried a refund");
      for (std::size_t c = 0; c < C; ++c) y[c] += e.decision.demand[c];
      revenue += e.decision.payment;
    } else {
      if (e.outcome.status != SettleStatus::fail) out.push_back(at + "overflowing request was not FAIL");
      if (e.outcome.refund != e.decision.payment) out.push_back(at + "FAIL refund differs from payment");
      if (result.payments[n] != 0.0) out.push_back(at + "FAIL tenant still charged");
    }
    for (std::size_t c = 0; c < C; ++c) {
      if (y[c] > 1.0 + tol) out.push_back(at + "capacity exceeded on resource " + std::to_string(c));
    }
  }

  for (std::size_t c = 0; c < C; ++c) {
    if (!close(y[c], result.allocation.utilization[c], tol) || !close(y[c], result.ledger.utilization[c], tol)) {
      out.push_back("final utilization of resource " + std::to_string(c) + " does not replay");
    }
  }
  if (!close(revenue, result.ledger.revenue, tol)) out.push_back("revenue does not match SUCC payments");
  double charged = 0.0;
  for (double p : result.payments) charged += p;
  if (!close(charged, result.ledger.revenue, tol)) out.push_back("tenant payments do not sum to revenue");

  const auto bad = dual_violations(instance, result.certificate, tol);
  if (!bad.empty()) out.push_back(std::to_string(bad.size()) + " dual constraints violated");

  const double welfare = social_welfare(instance, result.allocation);
  const Utilities u = utilities(instance, result.allocation, result.payments);
  double total = u.mvno;
  for (double t : u.tenants) total += t;
  if (!close(total, welfare, tol)) {
    out.push_back("utilities sum to " + num(total) + " but welfare is " + num(welfare));
  }
  return out;
}

SuiteReport check_session_invariants(std::size_t sessions, std::uint64_t seed) {
  SuiteReport report;
  report.name = "session invariants";
  SuiteTimer timer(report);
  for (std::size_t i = 0; i < sessions; ++i) {
    const std::uint64_t s = trial_seed(seed, 0, i);
    const Instance instance = random_instance(s, 60, 6, 3.0);
    const auto order = arrival_order(instance.tenants(), s ^ 0x5eedULL);
    const PricingSchedule schedule(instance.market);
    const SessionResult result = run_session(instance, schedule, order);
    record(report, s, session_violations(instance, schedule, order, result));
    ++report.cases;
  }
  timer.stop();
  return report;
}

SuiteReport check_terminal_identity(std::size_t setups, std::uint64_t seed, double rel_tol) {
  SuiteReport report;
  report.name = "terminal price identity";
  SuiteTimer timer(report);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cost(0.05, 2.0), gap(0.05, 3.0), spread(0.0, 20.0);
  std::uniform_int_distribution<std::size_t> count(1, 9);
  for (std::size_t i = 0; i < setups; ++i) {
    const std::uint64_t s = rng();
    std::mt19937_64 local(s);
    MarketSetup setup;
    const std::size_t C = count(local);
    for (std::size_t c = 0; c < C; ++c) {
      const double q = cost(local);
      const double lo = q + gap(local);
      setup.cost_coeffs.push_back(q);
      setup.lower_bounds.push_back(lo);
      setup.upper_bounds.push_back(lo + spread(local));
    }
    const PricingSchedule schedule(setup);
    double upper_sum = 0.0, cost_sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      upper_sum += setup.upper_bounds[c];
      cost_sum += setup.cost_coeffs[c];
    }
    std::vector<std::string> problems;
    for (std::size_t c = 0; c < C; ++c) {
      const double expected = upper_sum - (cost_sum - setup.cost_coeffs[c]);
      const double got = schedule.price_at(c, 1.0).value();
      if (std::abs(got - expected) > rel_tol * std::abs(expected)) {
        problems.push_back("resource " + std::to_string(c) + ": " + num(got) + " vs " + num(expected));
      }
    }
    record(report, s, problems);
    ++report.cases;
  }
  timer.stop();
  return report;
}

SuiteReport check_competitive_bound(std::size_t instances, std::uint64_t seed, std::size_t max_tenants,
                                    std::size_t max_resources) {
  SuiteReport report;
  report.name = "competitive bound";
  SuiteTimer timer(report);
  for (std::size_t i = 0; i < instances; ++i) {
    const std::uint64_t s = trial_seed(seed, 1, i);
    std::mt19937_64 rng(s);
    GenConfig config;
    config.tenants = std::uniform_int_distribution<std::size_t>(1, max_tenants)(rng);
    config.resources = std::uniform_int_distribution<std::size_t>(1, max_resources)(rng);
    config.seed = rng();
    const Instance instance = generate_instance(config);
    const auto order = arrival_order(instance.tenants(), rng());
    const PricingSchedule schedule(instance.market);
    const SessionResult session = run_session(instance, schedule, order, {false, false});
    const double online = social_welfare(instance, session.allocation);
    const OracleResult best = offline_exact(instance, {ExactOptions::Path::exhaustive});
    const double alpha = schedule.competitive_ratio();
    ++report.cases;
    if (!(online > 0.0)) {
      ++report.skipped;
      continue;
    }
    std::vector<std::string> problems;
    if (best.objective > alpha * online + 1e-9 * std::max(1.0, best.objective)) {
      problems.push_back("offline " + num(best.objective) + " > alpha " + num(alpha) + " * online " + num(online) +
                         " (N=" + std::to_string(instance.tenants()) + ", C=" +
                         std::to_string(instance.resources()) + ")");
    }
    record(report, s, problems);
  }
  timer.stop();
  return report;
}

SuiteReport check_oracle_agreement(std::size_t instances, std::uint64_t seed, std::size_t max_tenants) {
  SuiteReport report;
  report.name = "oracle agreement";
  SuiteTimer timer(report);
  for (std::size_t i = 0; i < instances; ++i) {
    const std::uint64_t s = trial_seed(seed, 2, i);
    const Instance instance = random_instance(s, max_tenants, 4, 2.5);
    const OracleResult exhaustive = offline_exact(instance, {ExactOptions::Path::exhaustive});
    const OracleResult bnb = offline_exact(instance, {ExactOptions::Path::branch_and_bound});
    const double lp = lp_upper_bound(instance);
    std::vector<std::string> problems;
    if (!bnb.optimal) problems.push_back("branch-and-bound ran out of budget");
    if (!close(exhaustive.objective, bnb.objective, 1e-9)) {
      problems.push_back("exhaustive " + num(exhaustive.objective) + " vs branch-and-bound " + num(bnb.objective));
    }
    if (lp < exhaustive.objective - 1e-9 * std::max(1.0, exhaustive.objective)) {
      problems.push_back("LP " + num(lp) + " below exact " + num(exhaustive.objective));
    }
    record(report, s, problems);
    ++report.cases;
  }
  timer.stop();
  return report;
}

SuiteReport check_transcript_schema(std::size_t sessions, std::uint64_t seed) {
  using nlohmann::json;
  SuiteReport report;
  report.name = "transcript schema";
  SuiteTimer timer(report);
  static const char* const leaks[] = {"v", "valuation", "psi", "surplus", "profile"};
  for (std::size_t i = 0; i < sessions; ++i) {
    const std::uint64_t s = trial_seed(seed, 3, i);
    const Instance instance = random_instance(s, 30, 4, 2.0);
    const auto order = arrival_order(instance.tenants(), s ^ 0x7ab1eULL);
    const PricingSchedule schedule(instance.market);
    const SessionResult result = run_session(instance, schedule, order);
    const std::string text = encode_transcript(result.ledger.transcript);
    std::vector<std::string> problems;
    for (const SchemaViolation& v : validate_transcript_text(text)) {
      problems.push_back("clean line " + std::to_string(v.line) + " rejected: " + v.reason);
    }
    std::istringstream lines(text);
    std::string line;
    std::size_t k = 0;
    while (std::getline(lines, line)) {
      const std::size_t n = order[k++];
      json j = json::parse(line);
      const char* key = leaks[k % std::size(leaks)];
      if (std::string(key) == "profile") {
        j[key] = std::vector<double>(instance.demands.row(n).begin(), instance.demands.row(n).end());
      } else {
        j[key] = instance.valuations[n];
      }
      if (validate_transcript_text(j.dump() + "\n").empty()) {
        problems.push_back(std::string("line with injected '") + key + "' was accepted");
      }
    }
    record(report, s, problems);
    ++report.cases;
  }
  timer.stop();
  return report;
}

}  // namespace dpos
