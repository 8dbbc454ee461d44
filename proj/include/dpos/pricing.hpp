#pragma once

#include <cstddef>
#include <vector>

#include "dpos/extended.hpp"
#include "dpos/market.hpp"

namespace dpos {

/// A posted-price rule: maps the current utilization of resource c to the
/// unit rental price quoted to the next tenant.
class PriceRule {
public:
  virtual ~PriceRule() = default;
  virtual std::size_t resource_count() const = 0;
  virtual ExtendedValue price_at(std::size_t c, double y) const = 0;
};

/// Threshold-exponential schedule for linear costs.
///
/// Resource c sells at its density floor until utilization reaches w_c, then
/// the price grows as q_c + (floor_c - q_c) exp(y / w_c - 1) up to capacity,
/// where it equals sum_c' (ceiling_c' - q_c') + q_c. Beyond capacity the price
/// is +inf. The competitive ratio is max_c 1 / w_c.
class PricingSchedule final : public PriceRule {
public:
  struct Resource {
    double cost_coeff;
    double lower;
    double upper;
    double threshold;  // w_c
  };

  /// Throws Errc::precondition if the setup is not a valid market.
  explicit PricingSchedule(const MarketSetup& setup);

  std::size_t resource_count() const override { return resources_.size(); }
  ExtendedValue price_at(std::size_t c, double y) const override;

  const Resource& resource(std::size_t c) const;
  double threshold(std::size_t c) const { return resource(c).threshold; }
  double competitive_ratio() const { return alpha_; }

private:
  std::vector<Resource> resources_;
  double alpha_ = 1.0;
};

inline PricingSchedule build_schedule(const MarketSetup& setup) { return PricingSchedule(setup); }

/// Linear ramp used by the myopic baseline: ((lower_c + upper_c) / C) y on
/// [0, 1], +inf beyond.
class MyopicPricing final : public PriceRule {
public:
  explicit MyopicPricing(const MarketSetup& setup);

  std::size_t resource_count() const override { return slopes_.size(); }
  ExtendedValue price_at(std::size_t c, double y) const override;

private:
  std::vector<double> slopes_;
};

}  // namespace dpos
