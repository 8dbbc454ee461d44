#include "dpos/market.hpp"

#include <cmath>
#include <sstream>

namespace dpos {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::invalid_resource: return "invalid_resource";
    case Errc::precondition: return "precondition";
    case Errc::infeasible: return "infeasible";
    case Errc::protocol_violation: return "protocol_violation";
    case Errc::infinite_arithmetic: return "infinite_arithmetic";
    case Errc::io: return "io";
    case Errc::validation: return "validation";
    case Errc::internal: return "internal";
  }
  return "unknown";
}

std::string ExtendedValue::to_string() const {
  if (is_pos_inf()) return "+inf";
  if (is_neg_inf()) return "-inf";
  std::ostringstream os;
  os << value_;
  return os.str();
}

namespace {

void check_resource(const MarketSetup& setup, std::size_t c) {
  if (c >= setup.resource_count()) {
    std::ostringstream os;
    os << "resource index " << c << " out of range (C=" << setup.resource_count() << ")";
    throw Error(Errc::invalid_resource, os.str());
  }
}

}  // namespace

void validate_setup(const MarketSetup& setup) {
  const std::size_t C = setup.resource_count();
  if (C == 0) throw Error(Errc::invalid_argument, "market needs at least one resource");
  if (setup.lower_bounds.size() != C || setup.upper_bounds.size() != C) {
    throw Error(Errc::invalid_argument, "cost/bound vectors differ in length");
  }
  for (std::size_t c = 0; c < C; ++c) {
    const double q = setup.cost_coeffs[c];
    const double lo = setup.lower_bounds[c];
    const double hi = setup.upper_bounds[c];
    std::ostringstream os;
    os << "resource " << c << ": ";
    if (!std::isfinite(q) || !std::isfinite(lo) || !std::isfinite(hi)) {
      os << "non-finite parameter";
      throw Error(Errc::precondition, os.str());
    }
    if (!(q > 0.0)) {
      os << "0 < q_c violated (q_c=" << q << ")";
      throw Error(Errc::precondition, os.str());
    }
    if (!(q < lo)) {
      os << "q_c < p_lower_c violated (q_c=" << q << ", p_lower_c=" << lo << ")";
      throw Error(Errc::precondition, os.str());
    }
    if (!(lo <= hi)) {
      os << "p_lower_c <= p_upper_c violated (" << lo << " > " << hi << ")";
      throw Error(Errc::precondition, os.str());
    }
  }
}

DemandMatrix::DemandMatrix(std::size_t tenants, std::size_t resources, std::vector<double> data)
    : tenants_(tenants), resources_(resources), data_(std::move(data)) {
  if (data_.size() != tenants_ * resources_) {
    throw Error(Errc::invalid_argument, "demand matrix data does not match N x C");
  }
}

Allocation make_allocation(const Instance& instance, const std::vector<bool>& accepted) {
  const std::size_t N = instance.tenants();
  const std::size_t C = instance.resources();
  if (accepted.size() != N) throw Error(Errc::invalid_argument, "decision vector length != N");
  Allocation a{accepted, std::vector<double>(C, 0.0)};
  for (std::size_t n = 0; n < N; ++n) {
    if (!accepted[n]) continue;
    for (std::size_t c = 0; c < C; ++c) a.utilization[c] += instance.demands(n, c);
  }
  return a;
}

Instance arrival_sequence(const Instance& instance, std::span<const std::size_t> order) {
  const std::size_t N = instance.tenants();
  const std::size_t C = instance.resources();
  if (order.size() != N) throw Error(Errc::invalid_argument, "arrival order must cover every tenant");
  std::vector<bool> seen(N, false);
  Instance out{instance.market, DemandMatrix(N, C), std::vector<double>(N)};
  for (std::size_t k = 0; k < N; ++k) {
    const std::size_t n = order[k];
    if (n >= N || seen[n]) throw Error(Errc::invalid_argument, "arrival order is not a permutation");
    seen[n] = true;
    out.valuations[k] = instance.valuations[n];
    for (std::size_t c = 0; c < C; ++c) out.demands(k, c) = instance.demands(n, c);
  }
  return out;
}

double adjusted_profit(const Instance& instance, std::size_t n) {
  double marginal = 0.0;
  for (std::size_t c = 0; c < instance.resources(); ++c) {
    marginal += instance.market.cost_coeffs[c] * instance.demands(n, c);
  }
  return instance.valuations[n] - marginal;
}

ExtendedValue cost(const MarketSetup& setup, std::size_t c, double y) {
  check_resource(setup, c);
  if (!(y >= 0.0)) throw Error(Errc::invalid_argument, "utilization must be >= 0");
  if (y > 1.0) return ExtendedValue::pos_infinity();
  return setup.cost_coeffs[c] * y;
}

double conjugate(const MarketSetup& setup, std::size_t c, double price) {
  check_resource(setup, c);
  if (!(price >= 0.0)) throw Error(Errc::invalid_argument, "price must be >= 0");
  const double q = setup.cost_coeffs[c];
  return price > q ? price - q : 0.0;
}

ExtendedValue profit(const MarketSetup& setup, std::size_t c, double price, double y) {
  check_resource(setup, c);
  if (!(price >= 0.0)) throw Error(Errc::invalid_argument, "price must be >= 0");
  const ExtendedValue f = cost(setup, c, y);
  if (f.is_pos_inf()) return ExtendedValue::neg_infinity();
  return price * y - f.value();
}

double social_welfare(const Instance& instance, const Allocation& allocation) {
  const std::size_t C = instance.resources();
  if (allocation.accepted.size() != instance.tenants() || allocation.utilization.size() != C) {
    throw Error(Errc::invalid_argument, "allocation shape does not match instance");
  }
  double welfare = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    const double y = allocation.utilization[c];
    if (y > 1.0 + kFeasibilityEps) {
      std::ostringstream os;
      os << "allocation infeasible on resource " << c << " (y=" << y << " > 1)";
      throw Error(Errc::infeasible, os.str());
    }
    welfare -= instance.market.cost_coeffs[c] * y;
  }
  for (std::size_t n = 0; n < instance.tenants(); ++n) {
    if (allocation.accepted[n]) welfare += instance.valuations[n];
  }
  return welfare;
}

Utilities utilities(const Instance& instance, const Allocation& allocation,
                    std::span<const double> payments) {
  const std::size_t N = instance.tenants();
  if (payments.size() != N) throw Error(Errc::invalid_argument, "payment vector length != N");
  Utilities u;
  u.tenants.assign(N, 0.0);
  double revenue = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    if (!(payments[n] >= 0.0)) {
      throw Error(Errc::invalid_argument, "payment of tenant " + std::to_string(n) + " is negative");
    }
    if (!allocation.accepted[n]) {
      if (payments[n] != 0.0) {
        throw Error(Errc::invalid_argument,
                    "payment attached to rejected tenant " + std::to_string(n));
      }
      continue;
    }
    u.tenants[n] = instance.valuations[n] - payments[n];
    revenue += payments[n];
  }
  double op_cost = 0.0;
  for (std::size_t c = 0; c < instance.resources(); ++c) {
    const double y = allocation.utilization[c];
    if (y > 1.0 + kFeasibilityEps) {
      throw Error(Errc::infeasible, "allocation infeasible on resource " + std::to_string(c));
    }
    op_cost += instance.market.cost_coeffs[c] * y;
  }
  u.mvno = revenue - op_cost;
  return u;
}

}  // namespace dpos
