#include "dpos/pricing.hpp"

#include <cmath>
#include <string>

namespace dpos {

PricingSchedule::PricingSchedule(const MarketSetup& setup) {
  validate_setup(setup);
  const std::size_t C = setup.resource_count();

  double headroom = 0.0;  // sum_c (upper_c - q_c)
  for (std::size_t c = 0; c < C; ++c) headroom += setup.upper_bounds[c] - setup.cost_coeffs[c];

  resources_.reserve(C);
  alpha_ = 1.0;
  for (std::size_t c = 0; c < C; ++c) {
    const double q = setup.cost_coeffs[c];
    const double lo = setup.lower_bounds[c];
    const double w = 1.0 / (1.0 + std::log(headroom / (lo - q)));
    if (!(w > 0.0 && w <= 1.0)) {
      throw Error(Errc::internal, "threshold of resource " + std::to_string(c) + " outside (0, 1]");
    }
    resources_.push_back({q, lo, setup.upper_bounds[c], w});
    alpha_ = std::max(alpha_, 1.0 / w);
  }
}

const PricingSchedule::Resource& PricingSchedule::resource(std::size_t c) const {
  if (c >= resources_.size()) {
    throw Error(Errc::invalid_resource, "resource index " + std::to_string(c) + " out of range");
  }
  return resources_[c];
}

ExtendedValue PricingSchedule::price_at(std::size_t c, double y) const {
  const Resource& r = resource(c);
  if (!(y >= 0.0)) throw Error(Errc::invalid_argument, "utilization must be >= 0");
  if (y > 1.0) return ExtendedValue::pos_infinity();
  if (y < r.threshold) return r.lower;
  return r.cost_coeff + (r.lower - r.cost_coeff) * std::exp(y / r.threshold - 1.0);
}

MyopicPricing::MyopicPricing(const MarketSetup& setup) {
  validate_setup(setup);
  const std::size_t C = setup.resource_count();
  slopes_.reserve(C);
  for (std::size_t c = 0; c < C; ++c) {
    slopes_.push_back((setup.lower_bounds[c] + setup.upper_bounds[c]) / static_cast<double>(C));
  }
}

ExtendedValue MyopicPricing::price_at(std::size_t c, double y) const {
  if (c >= slopes_.size()) {
    throw Error(Errc::invalid_resource, "resource index " + std::to_string(c) + " out of range");
  }
  if (!(y >= 0.0)) throw Error(Errc::invalid_argument, "utilization must be >= 0");
  if (y > 1.0) return ExtendedValue::pos_infinity();
  return slopes_[c] * y;
}

}  // namespace dpos
