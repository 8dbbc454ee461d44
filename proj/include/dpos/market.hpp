#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dpos/extended.hpp"

namespace dpos {

/// Absolute slack allowed on capacity checks of offline allocations.
inline constexpr double kFeasibilityEps = 1e-9;

/// Public market parameters: linear cost coefficients and earning-density
/// bounds for each resource. Every capacity is normalized to 1.
struct MarketSetup {
  std::vector<double> cost_coeffs;   // q_c
  std::vector<double> lower_bounds;  // floor on earning density
  std::vector<double> upper_bounds;  // ceiling on earning density

  std::size_t resource_count() const { return cost_coeffs.size(); }

  bool operator==(const MarketSetup&) const = default;
};

/// Throws Errc::precondition naming the first resource that breaks
/// 0 < q_c < lower_c <= upper_c, or Errc::invalid_argument on shape errors.
void validate_setup(const MarketSetup& setup);

/// Row-major N x C matrix of resource demands.
class DemandMatrix {
public:
  DemandMatrix() = default;
  DemandMatrix(std::size_t tenants, std::size_t resources)
      : tenants_(tenants), resources_(resources), data_(tenants * resources, 0.0) {}
  DemandMatrix(std::size_t tenants, std::size_t resources, std::vector<double> data);

  std::size_t tenants() const { return tenants_; }
  std::size_t resources() const { return resources_; }

  double operator()(std::size_t n, std::size_t c) const { return data_[n * resources_ + c]; }
  double& operator()(std::size_t n, std::size_t c) { return data_[n * resources_ + c]; }

  std::span<const double> row(std::size_t n) const {
    return {data_.data() + n * resources_, resources_};
  }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const DemandMatrix&) const = default;

private:
  std::size_t tenants_ = 0;
  std::size_t resources_ = 0;
  std::vector<double> data_;
};

/// A complete arrival population: public setup plus every tenant's demand and
/// valuation. Only offline solvers and the tenant agents look at valuations.
struct Instance {
  MarketSetup market;
  DemandMatrix demands;
  std::vector<double> valuations;

  std::size_t tenants() const { return valuations.size(); }
  std::size_t resources() const { return market.resource_count(); }

  bool operator==(const Instance&) const = default;
};

struct Allocation {
  std::vector<bool> accepted;       // x_n
  std::vector<double> utilization;  // y_c = sum_n d_n^c x_n
};

/// Builds an allocation and its utilization vector from decisions.
Allocation make_allocation(const Instance& instance, const std::vector<bool>& accepted);

/// Copy whose tenant k is `order[k]` of the original, so that walking the
/// copy front to back replays that arrival order with sequential memory
/// access. `order` must be a permutation of 0..N-1.
Instance arrival_sequence(const Instance& instance, std::span<const std::size_t> order);

/// v_n - sum_c q_c d_n^c: the welfare contribution of accepting tenant n.
double adjusted_profit(const Instance& instance, std::size_t n);

// Economic primitives over linear costs f_c(y) = q_c y.

/// Extended cost: q_c y on [0, 1], +inf beyond capacity.
ExtendedValue cost(const MarketSetup& setup, std::size_t c, double y);

/// Maximum profit h_c(p) = max(0, p - q_c).
double conjugate(const MarketSetup& setup, std::size_t c, double price);

/// Profit p y - extended cost; -inf beyond capacity.
ExtendedValue profit(const MarketSetup& setup, std::size_t c, double price, double y);

/// sum_n v_n x_n - sum_c q_c y_c. Throws Errc::infeasible naming the first
/// resource whose utilization exceeds 1 + kFeasibilityEps.
double social_welfare(const Instance& instance, const Allocation& allocation);

struct Utilities {
  double mvno = 0.0;
  std::vector<double> tenants;
};

/// Payments must be non-negative and zero for rejected tenants.
Utilities utilities(const Instance& instance, const Allocation& allocation,
                    std::span<const double> payments);

}  // namespace dpos
