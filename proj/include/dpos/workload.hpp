#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dpos/market.hpp"

namespace dpos {

/// Tenant population generator settings. Defaults follow the reference
/// experiment setup: N=100 tenants, C=3 resources, Gaussian demands with
/// mean 1/N and standard deviation 1/N^2, about a million subscribers per
/// tenant, 40% free users, QoS pyramid, q_c ~ U(lower_c/6, 5 lower_c/6).
struct GenConfig {
  std::size_t tenants = 100;
  std::size_t resources = 3;
  std::optional<double> demand_mean;  // default 1/N
  std::optional<double> demand_std;   // default 1/N^2
  double subscriber_mean = 1e6;
  double subscriber_std = 1e5;
  double pay_level_min = 2.0;
  double pay_level_max = 6.0;
  double qos_top_min = 2.0;
  double qos_top_max = 6.0;
  double free_fraction = 0.40;
  double pyramid_ratio = 0.5;  // weight of QoS level k is ratio^k
  double cost_low_frac = 1.0 / 6.0;
  double cost_high_frac = 5.0 / 6.0;
  double bound_margin = 0.0;
  double participation = 1.0;  // probability that a tenant demands a given resource
  std::uint64_t seed = 0;

  double effective_demand_mean() const;
  double effective_demand_std() const;

  bool operator==(const GenConfig&) const = default;
};

/// Throws Errc::invalid_argument describing the first bad field.
void validate_config(const GenConfig& config);

/// Private side of a tenant: never handed to the MVNO.
struct TenantPrivate {
  std::vector<std::uint64_t> level_counts;  // index 0: free users, k: QoS level k
  double pay_level = 0.0;
  double qos_top = 0.0;
  double raw_valuation = 0.0;
  double valuation = 0.0;  // after global rescaling
};

/// v = sum over subscribers of (QoS level) * sigma(pay level), sigma = identity;
/// free users contribute nothing.
double raw_valuation(const std::vector<std::uint64_t>& level_counts, double pay_level);

struct Population {
  Instance instance;
  std::vector<TenantPrivate> tenants;
  double valuation_scale = 1.0;
};

Population generate_population(const GenConfig& config);
Instance generate_instance(const GenConfig& config);

struct DensityBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// densities[c] lists e_n^c over tenants with positive demand on c.
/// lower_c = (1 - margin) min, upper_c = (1 + margin) max. A resource with
/// no demanders falls back to the range over all densities.
DensityBounds derive_bounds(const std::vector<std::vector<double>>& densities, double margin = 0.0);

struct InstanceViolation {
  std::optional<std::size_t> tenant;
  std::optional<std::size_t> resource;
  std::string reason;
};

/// Empty iff demands are non-negative, valuations non-negative, every
/// earning density lies in [lower_c, upper_c] and 0 < q_c < lower_c.
std::vector<InstanceViolation> validate_instance(const Instance& instance);

/// JSON document {demands, valuations, bounds: {lower, upper}, costs, seed, config}.
std::string export_instance(const Instance& instance, const std::optional<GenConfig>& config = {});
Instance import_instance(const std::string& text);
std::optional<GenConfig> import_instance_config(const std::string& text);

std::string config_to_json(const GenConfig& config);
/// Fields absent from the document keep their defaults.
GenConfig config_from_json(const std::string& text, GenConfig base = {});

}  // namespace dpos
