#include "dpos/workload.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

namespace dpos {

using nlohmann::json;

double GenConfig::effective_demand_mean() const {
  return demand_mean ? *demand_mean : 1.0 / static_cast<double>(tenants);
}

double GenConfig::effective_demand_std() const {
  const double n = static_cast<double>(tenants);
  return demand_std ? *demand_std : 1.0 / (n * n);
}

void validate_config(const GenConfig& config) {
  auto fail = [](const std::string& what) { throw Error(Errc::invalid_argument, what); };
  if (config.tenants < 1) fail("tenant count must be >= 1");
  if (config.resources < 1) fail("resource count must be >= 1");
  if (!(config.effective_demand_mean() > 0.0)) fail("demand mean must be > 0");
  if (!(config.effective_demand_std() >= 0.0)) fail("demand std must be >= 0");
  if (!(config.subscriber_mean > 0.0) || !(config.subscriber_std >= 0.0)) {
    fail("subscriber distribution must have positive mean and non-negative std");
  }
  if (!(config.pay_level_min > 0.0 && config.pay_level_min <= config.pay_level_max)) {
    fail("pay level range must satisfy 0 < min <= max");
  }
  if (!(config.qos_top_min >= 1.0 && config.qos_top_min <= config.qos_top_max)) {
    fail("QoS top-level range must satisfy 1 <= min <= max");
  }
  if (!(config.free_fraction >= 0.0 && config.free_fraction < 1.0)) {
    fail("free-user fraction must lie in [0, 1)");
  }
  if (!(config.pyramid_ratio > 0.0)) fail("pyramid ratio must be > 0");
  if (!(config.cost_low_frac > 0.0 && config.cost_low_frac <= config.cost_high_frac &&
        config.cost_high_frac < 1.0)) {
    fail("cost range fractions must satisfy 0 < low <= high < 1");
  }
  if (!(config.bound_margin >= 0.0 && config.bound_margin < 1.0)) fail("bound margin must lie in [0, 1)");
  if (!(config.participation > 0.0 && config.participation <= 1.0)) {
    fail("participation probability must lie in (0, 1]");
  }
}

double raw_valuation(const std::vector<std::uint64_t>& level_counts, double pay_level) {
  double v = 0.0;
  for (std::size_t k = 1; k < level_counts.size(); ++k) {
    v += static_cast<double>(level_counts[k]) * static_cast<double>(k) * pay_level;
  }
  return v;
}

namespace {

constexpr double kMinDemand = 1e-6;
constexpr int kMaxResample = 10000;

double sample_demand(std::mt19937_64& rng, double mean, double sd) {
  std::normal_distribution<double> dist(mean, sd);
  for (int i = 0; i < kMaxResample; ++i) {
    const double d = dist(rng);
    if (d > kMinDemand) return d;
  }
  throw Error(Errc::invalid_argument, "demand distribution yields no positive samples");
}

std::uint64_t sample_binomial(std::mt19937_64& rng, std::uint64_t trials, double p) {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::binomial_distribution<std::uint64_t> dist(trials, p);
  return dist(rng);
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

}  // namespace

Population generate_population(const GenConfig& config) {
  validate_config(config);
  const std::size_t N = config.tenants;
  const std::size_t C = config.resources;
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> subscribers(config.subscriber_mean, config.subscriber_std);

  Population pop;
  pop.instance.demands = DemandMatrix(N, C);
  pop.instance.valuations.assign(N, 0.0);
  pop.tenants.resize(N);

  const double mean = config.effective_demand_mean();
  const double sd = config.effective_demand_std();

  for (std::size_t n = 0; n < N; ++n) {
    // resource participation
    std::vector<bool> uses(C, true);
    if (config.participation < 1.0) {
      bool any = false;
      for (std::size_t c = 0; c < C; ++c) {
        uses[c] = unit(rng) < config.participation;
        any = any || uses[c];
      }
      if (!any) uses[std::uniform_int_distribution<std::size_t>(0, C - 1)(rng)] = true;
    }
    for (std::size_t c = 0; c < C; ++c) {
      if (uses[c]) pop.instance.demands(n, c) = sample_demand(rng, mean, sd);
    }

    TenantPrivate& t = pop.tenants[n];
    const double s = std::max(1.0, std::round(subscribers(rng)));
    const auto total = static_cast<std::uint64_t>(s);
    t.qos_top = config.qos_top_min + (config.qos_top_max - config.qos_top_min) * unit(rng);
    t.pay_level = config.pay_level_min + (config.pay_level_max - config.pay_level_min) * unit(rng);

    const auto levels = static_cast<std::size_t>(std::ceil(t.qos_top));
    t.level_counts.assign(levels + 1, 0);
    t.level_counts[0] = sample_binomial(rng, total, config.free_fraction);

    // Pyramid: split paying users over levels 1..K with weights ratio^k,
    // drawn as a multinomial through successive conditional binomials.
    std::vector<double> weight(levels + 1, 0.0);
    double weight_left = 0.0;
    for (std::size_t k = 1; k <= levels; ++k) {
      weight[k] = std::pow(config.pyramid_ratio, static_cast<double>(k));
      weight_left += weight[k];
    }
    std::uint64_t remaining = total - t.level_counts[0];
    for (std::size_t k = 1; k <= levels; ++k) {
      if (k == levels) {
        t.level_counts[k] = remaining;
        break;
      }
      const std::uint64_t draw = sample_binomial(rng, remaining, weight[k] / weight_left);
      t.level_counts[k] = draw;
      remaining -= draw;
      weight_left -= weight[k];
    }
    t.raw_valuation = raw_valuation(t.level_counts, t.pay_level);
  }

  // Rescale valuations so the median earning density is 1.
  std::vector<double> raw_densities;
  raw_densities.reserve(N * C);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t c = 0; c < C; ++c) {
      const double d = pop.instance.demands(n, c);
      if (d > 0.0) raw_densities.push_back(pop.tenants[n].raw_valuation / d);
    }
  }
  const double med = median_of(raw_densities);
  if (!(med > 0.0) || !std::isfinite(med)) {
    throw Error(Errc::invalid_argument, "degenerate population: no positive earning density");
  }
  pop.valuation_scale = 1.0 / med;
  for (std::size_t n = 0; n < N; ++n) {
    pop.tenants[n].valuation = pop.tenants[n].raw_valuation * pop.valuation_scale;
    pop.instance.valuations[n] = pop.tenants[n].valuation;
  }

  std::vector<std::vector<double>> densities(C);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t c = 0; c < C; ++c) {
      const double d = pop.instance.demands(n, c);
      if (d > 0.0) densities[c].push_back(pop.instance.valuations[n] / d);
    }
  }
  DensityBounds bounds = derive_bounds(densities, config.bound_margin);
  pop.instance.market.lower_bounds = bounds.lower;
  pop.instance.market.upper_bounds = bounds.upper;
  pop.instance.market.cost_coeffs.resize(C);
  for (std::size_t c = 0; c < C; ++c) {
    const double lo = bounds.lower[c];
    std::uniform_real_distribution<double> q(config.cost_low_frac * lo, config.cost_high_frac * lo);
    pop.instance.market.cost_coeffs[c] = q(rng);
  }
  return pop;
}

Instance generate_instance(const GenConfig& config) { return generate_population(config).instance; }

DensityBounds derive_bounds(const std::vector<std::vector<double>>& densities, double margin) {
  if (!(margin >= 0.0 && margin < 1.0)) throw Error(Errc::invalid_argument, "margin must lie in [0, 1)");
  double global_lo = std::numeric_limits<double>::infinity();
  double global_hi = -std::numeric_limits<double>::infinity();
  for (const auto& col : densities) {
    for (double e : col) {
      global_lo = std::min(global_lo, e);
      global_hi = std::max(global_hi, e);
    }
  }
  if (!std::isfinite(global_lo)) throw Error(Errc::invalid_argument, "no positive densities at all");

  DensityBounds b;
  for (const auto& col : densities) {
    double lo = global_lo, hi = global_hi;
    if (!col.empty()) {
      lo = *std::min_element(col.begin(), col.end());
      hi = *std::max_element(col.begin(), col.end());
    }
    b.lower.push_back((1.0 - margin) * lo);
    b.upper.push_back((1.0 + margin) * hi);
  }
  return b;
}

std::vector<InstanceViolation> validate_instance(const Instance& instance) {
  std::vector<InstanceViolation> out;
  const std::size_t N = instance.tenants();
  const std::size_t C = instance.resources();
  const MarketSetup& m = instance.market;
  if (C == 0 || m.lower_bounds.size() != C || m.upper_bounds.size() != C) {
    out.push_back({std::nullopt, std::nullopt, "bound/cost vectors missing or of different length"});
    return out;
  }
  if (instance.demands.tenants() != N || instance.demands.resources() != C) {
    out.push_back({std::nullopt, std::nullopt, "demand matrix shape does not match N x C"});
    return out;
  }
  for (std::size_t c = 0; c < C; ++c) {
    if (!(m.cost_coeffs[c] > 0.0)) out.push_back({std::nullopt, c, "0 < q_c violated"});
    if (!(m.cost_coeffs[c] < m.lower_bounds[c])) out.push_back({std::nullopt, c, "q_c < p_lower_c violated"});
    if (!(m.lower_bounds[c] <= m.upper_bounds[c])) {
      out.push_back({std::nullopt, c, "p_lower_c <= p_upper_c violated"});
    }
  }
  for (std::size_t n = 0; n < N; ++n) {
    const double v = instance.valuations[n];
    if (!(v >= 0.0)) out.push_back({n, std::nullopt, "valuation must be >= 0"});
    for (std::size_t c = 0; c < C; ++c) {
      const double d = instance.demands(n, c);
      if (!(d >= 0.0)) {
        out.push_back({n, c, "demand must be >= 0"});
        continue;
      }
      if (d == 0.0) continue;
      const double e = v / d;
      if (e < m.lower_bounds[c]) {
        std::ostringstream os;
        os << "earning density " << e << " below p_lower_c=" << m.lower_bounds[c];
        out.push_back({n, c, os.str()});
      } else if (e > m.upper_bounds[c]) {
        std::ostringstream os;
        os << "earning density " << e << " above p_upper_c=" << m.upper_bounds[c];
        out.push_back({n, c, os.str()});
      }
    }
  }
  return out;
}

namespace {

json config_json(const GenConfig& c) {
  json j;
  j["tenants"] = c.tenants;
  j["resources"] = c.resources;
  // null keeps the N-dependent defaults, so a tenant sweep rescales demand.
  j["demand_mean"] = c.demand_mean ? json(*c.demand_mean) : json(nullptr);
  j["demand_std"] = c.demand_std ? json(*c.demand_std) : json(nullptr);
  j["subscriber_mean"] = c.subscriber_mean;
  j["subscriber_std"] = c.subscriber_std;
  j["pay_level"] = {c.pay_level_min, c.pay_level_max};
  j["qos_top"] = {c.qos_top_min, c.qos_top_max};
  j["free_fraction"] = c.free_fraction;
  j["pyramid_ratio"] = c.pyramid_ratio;
  j["cost_range"] = {c.cost_low_frac, c.cost_high_frac};
  j["bound_margin"] = c.bound_margin;
  j["participation"] = c.participation;
  j["seed"] = c.seed;
  return j;
}

void read_pair(const json& j, const char* key, double& lo, double& hi) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2) {
    throw Error(Errc::validation, std::string("'") + key + "' must be a [lo, hi] pair");
  }
  lo = v[0].get<double>();
  hi = v[1].get<double>();
}

GenConfig config_from(const json& j, GenConfig c) {
  if (!j.is_object()) throw Error(Errc::validation, "config must be a JSON object");
  c.tenants = j.value("tenants", c.tenants);
  c.resources = j.value("resources", c.resources);
  auto read_optional = [&](const char* key, std::optional<double>& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) out.reset();
    else out = j.at(key).get<double>();
  };
  read_optional("demand_mean", c.demand_mean);
  read_optional("demand_std", c.demand_std);
  c.subscriber_mean = j.value("subscriber_mean", c.subscriber_mean);
  c.subscriber_std = j.value("subscriber_std", c.subscriber_std);
  read_pair(j, "pay_level", c.pay_level_min, c.pay_level_max);
  read_pair(j, "qos_top", c.qos_top_min, c.qos_top_max);
  c.free_fraction = j.value("free_fraction", c.free_fraction);
  c.pyramid_ratio = j.value("pyramid_ratio", c.pyramid_ratio);
  read_pair(j, "cost_range", c.cost_low_frac, c.cost_high_frac);
  c.bound_margin = j.value("bound_margin", c.bound_margin);
  c.participation = j.value("participation", c.participation);
  c.seed = j.value("seed", c.seed);
  return c;
}

json parse_or_throw(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::validation, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string config_to_json(const GenConfig& config) { return config_json(config).dump(2); }

GenConfig config_from_json(const std::string& text, GenConfig base) {
  try {
    return config_from(parse_or_throw(text), std::move(base));
  } catch (const json::exception& e) {
    throw Error(Errc::validation, std::string("bad config: ") + e.what());
  }
}

std::string export_instance(const Instance& instance, const std::optional<GenConfig>& config) {
  json j;
  json rows = json::array();
  for (std::size_t n = 0; n < instance.tenants(); ++n) {
    const auto r = instance.demands.row(n);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["demands"] = std::move(rows);
  j["valuations"] = instance.valuations;
  j["bounds"] = {{"lower", instance.market.lower_bounds}, {"upper", instance.market.upper_bounds}};
  j["costs"] = instance.market.cost_coeffs;
  if (config) {
    j["seed"] = config->seed;
    j["config"] = config_json(*config);
  } else {
    j["seed"] = nullptr;
    j["config"] = nullptr;
  }
  return j.dump();
}

Instance import_instance(const std::string& text) {
  const json j = parse_or_throw(text);
  try {
    Instance inst;
    inst.valuations = j.at("valuations").get<std::vector<double>>();
    inst.market.cost_coeffs = j.at("costs").get<std::vector<double>>();
    inst.market.lower_bounds = j.at("bounds").at("lower").get<std::vector<double>>();
    inst.market.upper_bounds = j.at("bounds").at("upper").get<std::vector<double>>();
    const std::size_t N = inst.valuations.size();
    const std::size_t C = inst.market.cost_coeffs.size();
    const json& rows = j.at("demands");
    if (!rows.is_array() || rows.size() != N) {
      throw Error(Errc::validation, "'demands' must have one row per valuation");
    }
    std::vector<double> flat;
    flat.reserve(N * C);
    for (const auto& row : rows) {
      auto r = row.get<std::vector<double>>();
      if (r.size() != C) throw Error(Errc::validation, "demand row length differs from resource count");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    inst.demands = DemandMatrix(N, C, std::move(flat));
    return inst;
  } catch (const json::exception& e) {
    throw Error(Errc::validation, std::string("bad instance document: ") + e.what());
  }
}

std::optional<GenConfig> import_instance_config(const std::string& text) {
  const json j = parse_or_throw(text);
  if (!j.contains("config") || j["config"].is_null()) return std::nullopt;
  return config_from(j["config"], GenConfig{});
}

}  // namespace dpos
