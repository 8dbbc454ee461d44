#include "dpos/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "dpos/pricing.hpp"
#include "dpos/transcript.hpp"

namespace dpos {

using nlohmann::json;

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& text, std::string_view what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::validation, std::string(what) + ": cannot parse '" + text + "' as a number");
  }
}

std::uint64_t parse_u64(const std::string& text, std::string_view what) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw Error(Errc::validation, std::string(what) + ": cannot parse '" + text + "' as an integer");
  }
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

bool range_axis(SweepAxis axis) {
  return axis == SweepAxis::cost_range || axis == SweepAxis::pay_level;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

template <class Fn>
std::uint64_t timed(bool enabled, Fn&& fn) {
  if (!enabled) {
    fn();
    return 0;
  }
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
}

struct Cell {
  std::size_t point;
  std::size_t local_trial;
};

std::vector<TrialMetrics> run_cell(const ExperimentSpec& spec, const GenConfig& point_config,
                                   const std::string& label, const Cell& cell) {
  const std::uint64_t seed = trial_seed(spec.seed, cell.point, cell.local_trial);
  GenConfig config = point_config;
  config.seed = seed;
  const Instance instance = generate_instance(config);
  const std::vector<std::size_t> order = arrival_order(instance.tenants(), derive_seed(seed, 1));
  // Online algorithms walk a copy stored in arrival order; this keeps the
  // timed loop free of random memory access without changing any outcome.
  const Instance arrived = arrival_sequence(instance, order);
  std::vector<std::size_t> in_sequence(order.size());
  for (std::size_t k = 0; k < in_sequence.size(); ++k) in_sequence[k] = k;
  const double alpha = PricingSchedule(instance.market).competitive_ratio();
  const std::size_t N = instance.tenants();
  const std::size_t C = instance.resources();

  auto base_row = [&](std::string algo) {
    TrialMetrics m;
    m.point = cell.point;
    m.axis_value = label;
    m.trial = cell.point * spec.trials + cell.local_trial;
    m.algo = std::move(algo);
    m.tenants = N;
    m.resources = C;
    m.seed = seed;
    m.theoretical_alpha = alpha;
    return m;
  };

  std::vector<TrialMetrics> rows;
  std::optional<double> reference;
  bool reference_is_bound = false;

  for (Algorithm algo : spec.algorithms) {
    TrialMetrics m = base_row(std::string(to_string(algo)));
    switch (algo) {
      case Algorithm::dpos:
      case Algorithm::ms: {
        SessionResult result;
        m.runtime_ns = timed(spec.timing, [&] {
          if (algo == Algorithm::dpos) {
            const PricingSchedule schedule(instance.market);
            result = run_session(arrived, schedule, in_sequence);
          } else {
            result = myopic_slicing(arrived, in_sequence);
          }
        });
        m.welfare = social_welfare(arrived, result.allocation);
        m.rental_rates = result.allocation.utilization;
        m.transcript_bytes = transcript_bytes(result.ledger.transcript);
        if (spec.transcripts) m.transcript = encode_transcript(result.ledger.transcript);
        break;
      }
      case Algorithm::rs: {
        BaselineResult r;
        m.runtime_ns = timed(spec.timing, [&] { r = random_slicing(arrived, in_sequence, derive_seed(seed, 2)); });
        m.welfare = r.welfare;
        m.rental_rates = r.utilization;
        break;
      }
      case Algorithm::ga: {
        BaselineResult r;
        GaParams params = spec.ga;
        params.seed = derive_seed(seed, 3);
        m.runtime_ns = timed(spec.timing, [&] { r = ga_heuristic(instance, params); });
        m.welfare = r.welfare;
        m.rental_rates = r.utilization;
        m.transcript_bytes = centralized_bytes(N, C);
        break;
      }
      case Algorithm::scpa: {
        BaselineResult r;
        m.runtime_ns = timed(spec.timing, [&] { r = scpa_adapted(instance); });
        m.welfare = r.welfare;
        m.rental_rates = r.utilization;
        m.transcript_bytes = centralized_bytes(N, C);
        break;
      }
      case Algorithm::oracle: {
        const bool want_exact = spec.oracle == OracleMode::exact ||
                                (spec.oracle == OracleMode::automatic && N <= kAutoExactLimit);
        OracleResult r;
        double value = 0.0;
        bool bound = !want_exact;
        m.runtime_ns = timed(spec.timing, [&] {
          if (want_exact) {
            r = offline_exact(instance, {ExactOptions::Path::automatic, spec.node_budget});
            if (r.optimal) {
              value = r.objective;
            } else {
              bound = true;
              value = r.upper_bound;
            }
          } else {
            value = lp_upper_bound(instance);
          }
        });
        m.algo = bound ? "lp" : "exact";
        m.welfare = value;
        if (!bound) m.rental_rates = make_allocation(instance, r.decisions).utilization;
        m.transcript_bytes = centralized_bytes(N, C);
        reference = value;
        reference_is_bound = bound;
        break;
      }
    }
    m.rental_rate = mean_of(m.rental_rates);
    rows.push_back(std::move(m));
  }

  if (reference) {
    for (TrialMetrics& m : rows) {
      m.ratio_is_bound = reference_is_bound;
      if (m.welfare > 0.0) m.ratio = *reference / m.welfare;
    }
  }
  return rows;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(Errc::io, "failed writing " + path.string());
}

}  // namespace

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::dpos: return "dpos";
    case Algorithm::ms: return "ms";
    case Algorithm::rs: return "rs";
    case Algorithm::ga: return "ga";
    case Algorithm::scpa: return "scpa";
    case Algorithm::oracle: return "oracle";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  const std::string s = lower_ascii(trim(name));
  if (s == "dpos") return Algorithm::dpos;
  if (s == "ms" || s == "myopic") return Algorithm::ms;
  if (s == "rs" || s == "random") return Algorithm::rs;
  if (s == "ga") return Algorithm::ga;
  if (s == "scpa") return Algorithm::scpa;
  if (s == "oracle" || s == "exact" || s == "lp" || s == "cvx") return Algorithm::oracle;
  throw Error(Errc::validation, "unknown algorithm '" + std::string(name) + "'");
}

std::vector<Algorithm> parse_algorithm_list(std::string_view csv) {
  std::vector<Algorithm> out;
  for (const std::string& tok : split(csv, ',')) {
    if (trim(tok).empty()) continue;
    const Algorithm a = parse_algorithm(tok);
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  }
  if (out.empty()) throw Error(Errc::validation, "algorithm list is empty");
  return out;
}

std::string_view to_string(OracleMode m) noexcept {
  switch (m) {
    case OracleMode::exact: return "exact";
    case OracleMode::lp: return "lp";
    case OracleMode::automatic: return "auto";
  }
  return "unknown";
}

OracleMode parse_oracle_mode(std::string_view name) {
  const std::string s = lower_ascii(trim(name));
  if (s == "exact") return OracleMode::exact;
  if (s == "lp") return OracleMode::lp;
  if (s == "auto" || s == "automatic") return OracleMode::automatic;
  throw Error(Errc::validation, "unknown oracle mode '" + std::string(name) + "' (expected exact, lp or auto)");
}

std::string_view to_string(SweepAxis a) noexcept {
  switch (a) {
    case SweepAxis::tenants: return "n";
    case SweepAxis::resources: return "c";
    case SweepAxis::demand_mean: return "mu";
    case SweepAxis::cost_range: return "q";
    case SweepAxis::pay_level: return "pay";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  const std::string s = lower_ascii(trim(name));
  if (s == "n" || s == "tenants") return SweepAxis::tenants;
  if (s == "c" || s == "resources") return SweepAxis::resources;
  if (s == "mu" || s == "demand_mean") return SweepAxis::demand_mean;
  if (s == "q" || s == "cost_range") return SweepAxis::cost_range;
  if (s == "pay" || s == "pay_level") return SweepAxis::pay_level;
  throw Error(Errc::validation, "unknown sweep axis '" + std::string(name) + "' (expected n, c, mu, q or pay)");
}

std::string SweepValue::label(SweepAxis axis) const {
  if (axis == SweepAxis::tenants || axis == SweepAxis::resources) {
    return std::to_string(static_cast<std::uint64_t>(lo));
  }
  if (range_axis(axis)) return format_double(lo) + ":" + format_double(hi);
  return format_double(lo);
}

std::vector<SweepValue> parse_sweep_values(std::string_view text, SweepAxis axis) {
  std::vector<SweepValue> out;
  for (const std::string& raw : split(text, ',')) {
    const std::string tok = trim(raw);
    if (tok.empty()) continue;
    const auto parts = split(tok, ':');
    SweepValue v;
    if (parts.size() == 1) {
      if (range_axis(axis)) {
        throw Error(Errc::validation, "axis " + std::string(to_string(axis)) + " needs lo:hi pairs, got '" + tok + "'");
      }
      v.lo = v.hi = parse_double(trim(parts[0]), "sweep value");
    } else if (parts.size() == 2) {
      if (!range_axis(axis)) {
        throw Error(Errc::validation, "axis " + std::string(to_string(axis)) + " takes scalars, got '" + tok + "'");
      }
      v.lo = parse_double(trim(parts[0]), "sweep value");
      v.hi = parse_double(trim(parts[1]), "sweep value");
    } else {
      throw Error(Errc::validation, "malformed sweep value '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

GenConfig apply_sweep(GenConfig config, SweepAxis axis, const SweepValue& value) {
  auto whole = [&](double v, std::string_view what) {
    if (!(v >= 1.0) || v != std::floor(v)) {
      throw Error(Errc::validation, std::string(what) + " must be a positive integer, got " + format_double(v));
    }
    return static_cast<std::size_t>(v);
  };
  switch (axis) {
    case SweepAxis::tenants: config.tenants = whole(value.lo, "N"); break;
    case SweepAxis::resources: config.resources = whole(value.lo, "C"); break;
    case SweepAxis::demand_mean: config.demand_mean = value.lo; break;
    case SweepAxis::cost_range:
      config.cost_low_frac = value.lo;
      config.cost_high_frac = value.hi;
      break;
    case SweepAxis::pay_level:
      config.pay_level_min = value.lo;
      config.pay_level_max = value.hi;
      break;
  }
  return config;
}

void validate_spec(const ExperimentSpec& spec) {
  if (spec.algorithms.empty()) throw Error(Errc::validation, "no algorithms selected");
  if (spec.trials == 0) throw Error(Errc::validation, "trials must be positive");
  if (spec.jobs == 0) throw Error(Errc::validation, "jobs must be positive");
  if (spec.node_budget == 0) throw Error(Errc::validation, "node_budget must be positive");
  if (spec.values.empty()) {
    try {
      validate_config(spec.base);
    } catch (const Error& e) {
      throw Error(Errc::validation, e.what());
    }
  }
  for (const SweepValue& v : spec.values) {
    try {
      validate_config(apply_sweep(spec.base, spec.axis, v));
    } catch (const Error& e) {
      throw Error(Errc::validation, "sweep value " + v.label(spec.axis) + ": " + e.what());
    }
  }
}

ExperimentSpec spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::validation, std::string("experiment spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::validation, "experiment spec must be a JSON object");
  static const std::vector<std::string> known{"algorithms", "config", "sweep", "trials", "seed", "oracle",
                                              "node_budget", "transcripts", "timing", "jobs", "ga"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(Errc::validation, "unknown experiment spec key '" + key + "'");
    }
  }
  ExperimentSpec spec;
  try {
    if (j.contains("algorithms")) {
      spec.algorithms.clear();
      for (const auto& a : j.at("algorithms")) {
        const Algorithm algo = parse_algorithm(a.get<std::string>());
        if (std::find(spec.algorithms.begin(), spec.algorithms.end(), algo) == spec.algorithms.end()) {
          spec.algorithms.push_back(algo);
        }
      }
    }
    if (j.contains("config")) spec.base = config_from_json(j.at("config").dump(), spec.base);
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      spec.axis = parse_sweep_axis(s.at("axis").get<std::string>());
      for (const auto& v : s.at("values")) {
        SweepValue sv;
        if (v.is_array()) {
          if (v.size() != 2 || !range_axis(spec.axis)) {
            throw Error(Errc::validation, "sweep value " + v.dump() + " does not fit axis " +
                                              std::string(to_string(spec.axis)));
          }
          sv.lo = v.at(0).get<double>();
          sv.hi = v.at(1).get<double>();
        } else {
          if (range_axis(spec.axis)) {
            throw Error(Errc::validation, "axis " + std::string(to_string(spec.axis)) + " needs [lo, hi] pairs");
          }
          sv.lo = sv.hi = v.get<double>();
        }
        spec.values.push_back(sv);
      }
    }
    if (j.contains("trials")) spec.trials = j.at("trials").get<std::size_t>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("oracle")) spec.oracle = parse_oracle_mode(j.at("oracle").get<std::string>());
    if (j.contains("node_budget")) spec.node_budget = j.at("node_budget").get<std::uint64_t>();
    if (j.contains("transcripts")) spec.transcripts = j.at("transcripts").get<bool>();
    if (j.contains("timing")) spec.timing = j.at("timing").get<bool>();
    if (j.contains("jobs")) spec.jobs = j.at("jobs").get<std::size_t>();
    if (j.contains("ga")) {
      const json& g = j.at("ga");
      spec.ga.population = g.value("population", spec.ga.population);
      spec.ga.generations = g.value("generations", spec.ga.generations);
      spec.ga.mutation_rate = g.value("mutation_rate", spec.ga.mutation_rate);
      spec.ga.tournament = g.value("tournament", spec.ga.tournament);
      spec.ga.elitism = g.value("elitism", spec.ga.elitism);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::validation, std::string("experiment spec: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

std::string spec_to_json(const ExperimentSpec& spec) {
  json j;
  json algos = json::array();
  for (Algorithm a : spec.algorithms) algos.push_back(std::string(to_string(a)));
  j["algorithms"] = algos;
  j["config"] = json::parse(config_to_json(spec.base));
  if (!spec.values.empty()) {
    json values = json::array();
    for (const SweepValue& v : spec.values) {
      if (range_axis(spec.axis)) {
        values.push_back(json::array({v.lo, v.hi}));
      } else {
        values.push_back(v.lo);
      }
    }
    j["sweep"] = {{"axis", std::string(to_string(spec.axis))}, {"values", values}};
  }
  j["trials"] = spec.trials;
  j["seed"] = spec.seed;
  j["oracle"] = std::string(to_string(spec.oracle));
  j["node_budget"] = spec.node_budget;
  j["transcripts"] = spec.transcripts;
  j["timing"] = spec.timing;
  j["jobs"] = spec.jobs;
  j["ga"] = {{"population", spec.ga.population},
             {"generations", spec.ga.generations},
             {"mutation_rate", spec.ga.mutation_rate},
             {"tournament", spec.ga.tournament},
             {"elitism", spec.ga.elitism}};
  return j.dump(2);
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t point, std::size_t trial) {
  return splitmix64(splitmix64(base) ^ splitmix64(point * 0x100000001b3ULL + 1) ^ splitmix64(~trial));
}

std::vector<std::size_t> arrival_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  return order;
}

std::vector<TrialMetrics> run_trials(const ExperimentSpec& spec) {
  validate_spec(spec);
  std::vector<SweepValue> values = spec.values;
  std::vector<GenConfig> configs;
  std::vector<std::string> labels;
  if (values.empty()) {
    configs.push_back(spec.base);
    const SweepValue here = [&] {
      switch (spec.axis) {
        case SweepAxis::tenants: return SweepValue{double(spec.base.tenants), double(spec.base.tenants)};
        case SweepAxis::resources: return SweepValue{double(spec.base.resources), double(spec.base.resources)};
        case SweepAxis::demand_mean: {
          const double mu = spec.base.effective_demand_mean();
          return SweepValue{mu, mu};
        }
        case SweepAxis::cost_range: return SweepValue{spec.base.cost_low_frac, spec.base.cost_high_frac};
        case SweepAxis::pay_level: return SweepValue{spec.base.pay_level_min, spec.base.pay_level_max};
      }
      return SweepValue{};
    }();
    labels.push_back(here.label(spec.axis));
  } else {
    for (const SweepValue& v : values) {
      configs.push_back(apply_sweep(spec.base, spec.axis, v));
      labels.push_back(v.label(spec.axis));
    }
  }

  std::vector<Cell> cells;
  for (std::size_t p = 0; p < configs.size(); ++p) {
    for (std::size_t t = 0; t < spec.trials; ++t) cells.push_back({p, t});
  }
  std::vector<std::vector<TrialMetrics>> results(cells.size());

  if (spec.jobs <= 1 || cells.size() <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      results[i] = run_cell(spec, configs[cells[i].point], labels[cells[i].point], cells[i]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(spec.jobs);
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < spec.jobs; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < cells.size(); i = next++) {
            results[i] = run_cell(spec, configs[cells[i].point], labels[cells[i].point], cells[i]);
          }
        } catch (...) {
          errors[w] = std::current_exception();
          next = cells.size();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<TrialMetrics> flat;
  for (auto& r : results) {
    for (auto& m : r) flat.push_back(std::move(m));
  }
  return flat;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(Errc::invalid_argument, "percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(Errc::invalid_argument, "percentile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

std::vector<SummaryRow> aggregate(const std::vector<TrialMetrics>& metrics) {
  std::vector<std::pair<std::size_t, std::string>> keys;
  std::map<std::pair<std::size_t, std::string>, std::vector<const TrialMetrics*>> groups;
  for (const TrialMetrics& m : metrics) {
    auto key = std::make_pair(m.point, m.algo);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) keys.push_back(key);
    it->second.push_back(&m);
  }

  std::map<std::size_t, double> dpos_runtime;
  std::vector<SummaryRow> rows;
  for (const auto& key : keys) {
    const auto& group = groups.at(key);
    SummaryRow r;
    r.point = key.first;
    r.algo = key.second;
    r.axis_value = group.front()->axis_value;
    r.count = group.size();
    std::vector<double> welfare, rental, ratio, alpha, runtime, bytes;
    for (const TrialMetrics* m : group) {
      welfare.push_back(m->welfare);
      rental.push_back(m->rental_rate);
      alpha.push_back(m->theoretical_alpha);
      runtime.push_back(static_cast<double>(m->runtime_ns));
      bytes.push_back(static_cast<double>(m->transcript_bytes));
      r.ratio_is_bound = r.ratio_is_bound || m->ratio_is_bound;
      if (m->ratio) {
        ratio.push_back(*m->ratio);
        if (*m->ratio > m->theoretical_alpha) ++r.ratio_above_alpha;
      }
    }
    r.welfare_mean = mean_of(welfare);
    r.welfare_median = percentile(welfare, 0.5);
    r.welfare_p05 = percentile(welfare, 0.05);
    r.welfare_p95 = percentile(welfare, 0.95);
    r.rental_rate_mean = mean_of(rental);
    r.ratio_count = ratio.size();
    // Rows without any oracle reference leave ratio undefined everywhere.
    r.ratio_undefined = group.size() - ratio.size();
    if (!ratio.empty()) {
      r.ratio_mean = mean_of(ratio);
      r.ratio_median = percentile(ratio, 0.5);
      r.ratio_p05 = percentile(ratio, 0.05);
      r.ratio_p95 = percentile(ratio, 0.95);
      r.ratio_max = *std::max_element(ratio.begin(), ratio.end());
    }
    r.theoretical_alpha_mean = mean_of(alpha);
    r.theoretical_alpha_min = *std::min_element(alpha.begin(), alpha.end());
    r.runtime_ns_mean = mean_of(runtime);
    r.transcript_bytes_mean = mean_of(bytes);
    if (r.algo == "dpos") dpos_runtime[r.point] = r.runtime_ns_mean;
    rows.push_back(std::move(r));
  }
  for (SummaryRow& r : rows) {
    auto it = dpos_runtime.find(r.point);
    if (it != dpos_runtime.end() && it->second > 0.0) r.runtime_rel_dpos = r.runtime_ns_mean / it->second;
  }
  return rows;
}

std::string trials_csv(const std::vector<TrialMetrics>& metrics) {
  std::string out(kTrialsCsvHeader);
  out += '\n';
  for (const TrialMetrics& m : metrics) {
    out += std::to_string(m.trial) + ',' + m.algo + ',' + std::to_string(m.tenants) + ',' +
           std::to_string(m.resources) + ',' + std::to_string(m.seed) + ',' + format_double(m.welfare) + ',' +
           format_double(m.rental_rate) + ',' + (m.ratio ? format_double(*m.ratio) : std::string()) + ',' +
           format_double(m.theoretical_alpha) + ',' + std::to_string(m.runtime_ns) + ',' +
           std::to_string(m.transcript_bytes) + '\n';
  }
  return out;
}

std::vector<TrialMetrics> parse_trials_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTrialsCsvHeader) {
    throw Error(Errc::validation, "trials CSV header mismatch");
  }
  std::vector<TrialMetrics> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 11) {
      throw Error(Errc::validation, "trials CSV line " + std::to_string(lineno) + ": expected 11 fields");
    }
    TrialMetrics m;
    m.trial = parse_u64(f[0], "trial");
    m.algo = f[1];
    m.tenants = parse_u64(f[2], "N");
    m.resources = parse_u64(f[3], "C");
    m.seed = parse_u64(f[4], "seed");
    m.welfare = parse_double(f[5], "welfare");
    m.rental_rate = parse_double(f[6], "rental_rate");
    if (!f[7].empty()) m.ratio = parse_double(f[7], "ratio");
    m.theoretical_alpha = parse_double(f[8], "theoretical_alpha");
    m.runtime_ns = parse_u64(f[9], "runtime_ns");
    m.transcript_bytes = parse_u64(f[10], "transcript_bytes");
    out.push_back(std::move(m));
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& summary) {
  std::string out =
      "point,axis_value,algo,trials,welfare_mean,welfare_median,welfare_p05,welfare_p95,rental_rate_mean,"
      "ratio_count,ratio_undefined,ratio_is_bound,ratio_mean,ratio_median,ratio_p05,ratio_p95,ratio_max,"
      "theoretical_alpha_mean,theoretical_alpha_min,ratio_above_alpha,runtime_ns_mean,runtime_rel_dpos,"
      "transcript_bytes_mean\n";
  for (const SummaryRow& r : summary) {
    const bool has_ratio = r.ratio_count > 0;
    auto ratio_field = [&](double v) { return has_ratio ? format_double(v) : std::string(); };
    out += std::to_string(r.point) + ',' + r.axis_value + ',' + r.algo + ',' + std::to_string(r.count) + ',' +
           format_double(r.welfare_mean) + ',' + format_double(r.welfare_median) + ',' +
           format_double(r.welfare_p05) + ',' + format_double(r.welfare_p95) + ',' +
           format_double(r.rental_rate_mean) + ',' + std::to_string(r.ratio_count) + ',' +
           std::to_string(r.ratio_undefined) + ',' + (r.ratio_is_bound ? "1" : "0") + ',' +
           ratio_field(r.ratio_mean) + ',' + ratio_field(r.ratio_median) + ',' + ratio_field(r.ratio_p05) + ',' +
           ratio_field(r.ratio_p95) + ',' + ratio_field(r.ratio_max) + ',' +
           format_double(r.theoretical_alpha_mean) + ',' + format_double(r.theoretical_alpha_min) + ',' +
           std::to_string(r.ratio_above_alpha) + ',' + format_double(r.runtime_ns_mean) + ',' +
           (r.runtime_rel_dpos ? format_double(*r.runtime_rel_dpos) : std::string()) + ',' +
           format_double(r.transcript_bytes_mean) + '\n';
  }
  return out;
}

std::string plot_data_json(const std::vector<SummaryRow>& summary, SweepAxis axis) {
  json j;
  j["axis"] = std::string(to_string(axis));
  json x = json::array();
  std::vector<std::size_t> points;
  for (const SummaryRow& r : summary) {
    if (std::find(points.begin(), points.end(), r.point) == points.end()) {
      points.push_back(r.point);
      x.push_back(r.axis_value);
    }
  }
  j["x"] = x;
  json welfare = json::object(), ratio = json::object(), rental = json::object();
  for (const SummaryRow& r : summary) {
    const auto idx = static_cast<std::size_t>(std::find(points.begin(), points.end(), r.point) - points.begin());
    for (json* series : {&welfare, &ratio, &rental}) {
      if (!series->contains(r.algo)) (*series)[r.algo] = json(std::vector<json>(points.size(), nullptr));
    }
    welfare[r.algo][idx] = r.welfare_mean;
    rental[r.algo][idx] = r.rental_rate_mean;
    if (r.ratio_count > 0) ratio[r.algo][idx] = r.ratio_median;
  }
  j["welfare"] = welfare;
  j["ratio"] = ratio;
  j["rental_rate"] = rental;
  return j.dump(2) + "\n";
}

void emit(const std::vector<SummaryRow>& summary, const std::vector<TrialMetrics>& metrics, SweepAxis axis,
          const EmitPaths& paths) {
  std::error_code ec;
  std::filesystem::create_directories(paths.out_dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + paths.out_dir.string() + ": " + ec.message());
  write_file(paths.out_dir / "trials.csv", trials_csv(metrics));
  write_file(paths.out_dir / "summary.csv", summary_csv(summary));
  write_file(paths.out_dir / "plot.json", plot_data_json(summary, axis));
  if (!paths.transcripts) return;
  const auto dir = paths.out_dir / "transcripts";
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
  for (const TrialMetrics& m : metrics) {
    if (m.algo != "dpos" && m.algo != "ms") continue;
    write_file(dir / ("trial_" + std::to_string(m.trial) + "_" + m.algo + ".jsonl"), m.transcript);
  }
}

}  // namespace dpos
