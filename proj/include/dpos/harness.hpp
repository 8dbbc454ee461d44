#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpos/baselines.hpp"
#include "dpos/oracle.hpp"
#include "dpos/workload.hpp"

namespace dpos {

enum class Algorithm { dpos, ms, rs, ga, scpa, oracle };

std::string_view to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view name);
std::vector<Algorithm> parse_algorithm_list(std::string_view csv);

enum class OracleMode { exact, lp, automatic };

std::string_view to_string(OracleMode m) noexcept;
OracleMode parse_oracle_mode(std::string_view name);

/// Largest N for which OracleMode::automatic runs the exact solver.
inline constexpr std::size_t kAutoExactLimit = 25;

enum class SweepAxis { tenants, resources, demand_mean, cost_range, pay_level };

std::string_view to_string(SweepAxis a) noexcept;
SweepAxis parse_sweep_axis(std::string_view name);

/// A point on the sweep axis. Scalar axes use `lo` only; range axes
/// (cost_range, pay_level) use [lo, hi].
struct SweepValue {
  double lo = 0.0;
  double hi = 0.0;

  std::string label(SweepAxis axis) const;
  bool operator==(const SweepValue&) const = default;
};

/// Parses "5", "0.1:0.5" or comma-separated lists of either.
std::vector<SweepValue> parse_sweep_values(std::string_view text, SweepAxis axis);

/// Applies one sweep value on top of a config.
GenConfig apply_sweep(GenConfig config, SweepAxis axis, const SweepValue& value);

struct ExperimentSpec {
  std::vector<Algorithm> algorithms{Algorithm::dpos, Algorithm::ms, Algorithm::rs,
                                    Algorithm::ga, Algorithm::scpa, Algorithm::oracle};
  GenConfig base;
  SweepAxis axis = SweepAxis::tenants;
  std::vector<SweepValue> values;  // empty: single point at `base`
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  OracleMode oracle = OracleMode::automatic;
  std::uint64_t node_budget = 5'000'000;
  GaParams ga;
  bool transcripts = false;
  bool timing = true;  // false writes runtime_ns = 0 so outputs are byte-stable
  std::size_t jobs = 1;
};

/// Throws Errc::validation when the experiment spec is unusable.
void validate_spec(const ExperimentSpec& spec);

ExperimentSpec spec_from_json(const std::string& text);
std::string spec_to_json(const ExperimentSpec& spec);

struct TrialMetrics {
  std::size_t point = 0;
  std::string axis_value;
  std::size_t trial = 0;  // global index: point * trials + local trial
  std::string algo;       // "exact" or "lp" for oracle rows
  std::size_t tenants = 0;
  std::size_t resources = 0;
  std::uint64_t seed = 0;
  double welfare = 0.0;
  std::vector<double> rental_rates;
  double rental_rate = 0.0;
  std::optional<double> ratio;  // reference / welfare; undefined if welfare <= 0
  bool ratio_is_bound = false;  // reference was the LP bound
  double theoretical_alpha = 0.0;
  std::uint64_t runtime_ns = 0;
  std::uint64_t transcript_bytes = 0;
  std::string transcript;  // JSONL, kept only when transcripts are requested
};

/// Seed for one (point, trial) cell.
std::uint64_t trial_seed(std::uint64_t base, std::size_t point, std::size_t trial);

/// Seeded uniform permutation of 0..n-1.
std::vector<std::size_t> arrival_order(std::size_t n, std::uint64_t seed);

/// Every algorithm of a trial sees the same instance and arrival order.
/// Output order is (point, trial, algorithm) regardless of `jobs`.
std::vector<TrialMetrics> run_trials(const ExperimentSpec& spec);

struct SummaryRow {
  std::size_t point = 0;
  std::string axis_value;
  std::string algo;
  std::size_t count = 0;
  double welfare_mean = 0.0, welfare_median = 0.0, welfare_p05 = 0.0, welfare_p95 = 0.0;
  double rental_rate_mean = 0.0;
  std::size_t ratio_count = 0;
  std::size_t ratio_undefined = 0;
  bool ratio_is_bound = false;
  double ratio_mean = 0.0, ratio_median = 0.0, ratio_p05 = 0.0, ratio_p95 = 0.0, ratio_max = 0.0;
  double theoretical_alpha_mean = 0.0, theoretical_alpha_min = 0.0;
  std::size_t ratio_above_alpha = 0;
  double runtime_ns_mean = 0.0;
  std::optional<double> runtime_rel_dpos;
  double transcript_bytes_mean = 0.0;
};

/// Linear-interpolation percentile, q in [0, 1]. Throws on empty input.
double percentile(std::vector<double> values, double q);

/// Per (point, algorithm) statistics; rows follow first appearance order.
std::vector<SummaryRow> aggregate(const std::vector<TrialMetrics>& metrics);

inline constexpr std::string_view kTrialsCsvHeader =
    "trial,algo,N,C,seed,welfare,rental_rate,ratio,theoretical_alpha,runtime_ns,transcript_bytes";

std::string trials_csv(const std::vector<TrialMetrics>& metrics);
std::vector<TrialMetrics> parse_trials_csv(const std::string& text);
std::string summary_csv(const std::vector<SummaryRow>& summary);
/// {"axis": ..., "x": [...], "welfare": {algo: [...]}, "ratio": {...}, "rental_rate": {...}}
std::string plot_data_json(const std::vector<SummaryRow>& summary, SweepAxis axis);

struct EmitPaths {
  std::filesystem::path out_dir;
  bool transcripts = false;
};

/// Writes trials.csv, summary.csv, plot.json and (optionally)
/// transcripts/trial_<k>_<algo>.jsonl. Throws Errc::io naming the path.
void emit(const std::vector<SummaryRow>& summary, const std::vector<TrialMetrics>& metrics,
          SweepAxis axis, const EmitPaths& paths);

}  // namespace dpos
