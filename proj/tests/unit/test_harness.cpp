#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dpos/harness.hpp"
#include "dpos/transcript.hpp"
#include "helpers.hpp"

using namespace dpos;
using testing::error_code;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.base.tenants = 12;
  spec.base.resources = 2;
  spec.trials = 6;
  spec.seed = 42;
  spec.timing = false;
  spec.ga.generations = 20;
  spec.ga.population = 20;
  return spec;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("name parsing") {
  CHECK(parse_algorithm("DPoS") == Algorithm::dpos);
  CHECK(parse_algorithm("myopic") == Algorithm::ms);
  CHECK(parse_algorithm("random") == Algorithm::rs);
  CHECK(parse_algorithm("exact") == Algorithm::oracle);
  CHECK(error_code([] { (void)parse_algorithm("greedy"); }) == Errc::validation);
  CHECK(parse_algorithm_list("dpos, ms,dpos") == std::vector<Algorithm>{Algorithm::dpos, Algorithm::ms});
  CHECK(error_code([] { (void)parse_algorithm_list(" , "); }) == Errc::validation);

  CHECK(parse_oracle_mode("auto") == OracleMode::automatic);
  CHECK(parse_sweep_axis("mu") == SweepAxis::demand_mean);
  CHECK(error_code([] { (void)parse_sweep_axis("z"); }) == Errc::validation);
}

TEST_CASE("sweep values") {
  const auto n = parse_sweep_values("10, 50,100", SweepAxis::tenants);
  REQUIRE(n.size() == 3);
  CHECK(n[1].lo == 50.0);
  CHECK(n[2].label(SweepAxis::tenants) == "100");
  const auto q = parse_sweep_values("0.1:0.5,0.2:0.6", SweepAxis::cost_range);
  REQUIRE(q.size() == 2);
  CHECK(q[0] == SweepValue{0.1, 0.5});
  CHECK(error_code([] { (void)parse_sweep_values("0.1", SweepAxis::pay_level); }) == Errc::validation);
  CHECK(error_code([] { (void)parse_sweep_values("1:2", SweepAxis::tenants); }) == Errc::validation);

  GenConfig g = apply_sweep({}, SweepAxis::tenants, {40, 40});
  CHECK(g.tenants == 40);
  g = apply_sweep({}, SweepAxis::cost_range, {0.2, 0.7});
  CHECK(g.cost_low_frac == 0.2);
  CHECK(g.cost_high_frac == 0.7);
  g = apply_sweep({}, SweepAxis::pay_level, {1, 3});
  CHECK(g.pay_level_max == 3.0);
  CHECK(error_code([] { (void)apply_sweep({}, SweepAxis::resources, {2.5, 2.5}); }) == Errc::validation);
}

TEST_CASE("spec JSON") {
  ExperimentSpec spec = small_spec();
  spec.algorithms = {Algorithm::dpos, Algorithm::oracle};
  spec.axis = SweepAxis::pay_level;
  spec.values = {{1, 2}, {2, 4}};
  spec.oracle = OracleMode::lp;
  const ExperimentSpec back = spec_from_json(spec_to_json(spec));
  CHECK(back.algorithms == spec.algorithms);
  CHECK(back.base == spec.base);
  CHECK(back.axis == spec.axis);
  CHECK(back.values == spec.values);
  CHECK(back.trials == spec.trials);
  CHECK(back.seed == spec.seed);
  CHECK(back.oracle == spec.oracle);
  CHECK(back.timing == spec.timing);

  CHECK(error_code([] { (void)spec_from_json("{\"trails\": 3}"); }) == Errc::validation);
  CHECK(error_code([] { (void)spec_from_json("[1]"); }) == Errc::validation);
  CHECK(error_code([] { (void)spec_from_json("{"); }) == Errc::validation);
  ExperimentSpec bad = small_spec();
  bad.trials = 0;
  CHECK(error_code([&] { validate_spec(bad); }) == Errc::validation);
  bad = small_spec();
  bad.base.tenants = 0;
  CHECK(error_code([&] { validate_spec(bad); }) == Errc::validation);
}

TEST_CASE("seeds and arrival orders") {
  CHECK(trial_seed(1, 0, 0) != trial_seed(1, 0, 1));
  CHECK(trial_seed(1, 0, 1) != trial_seed(1, 1, 0));
  CHECK(trial_seed(7, 3, 4) == trial_seed(7, 3, 4));
  auto order = arrival_order(50, 3);
  CHECK(order == arrival_order(50, 3));
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < 50; ++i) CHECK(order[i] == i);
}

TEST_CASE("percentile") {
  CHECK(percentile({3.0}, 0.5) == 3.0);
  CHECK(percentile({1.0, 2.0, 3.0, 4.0}, 0.5) == doctest::Approx(2.5));
  CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
  CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
  CHECK(percentile({0.0, 10.0}, 0.05) == doctest::Approx(0.5));
  CHECK(error_code([] { (void)percentile({}, 0.5); }) == Errc::invalid_argument);
}

TEST_CASE("trial rows") {
  const ExperimentSpec spec = small_spec();
  const auto metrics = run_trials(spec);
  REQUIRE(metrics.size() == spec.trials * 6);
  std::set<std::string> algos;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const TrialMetrics& m = metrics[i];
    algos.insert(m.algo);
    CHECK(m.trial == i / 6);
    CHECK(m.tenants == 12);
    CHECK(m.resources == 2);
    CHECK(m.runtime_ns == 0);
    CHECK(m.rental_rate >= 0.0);
    CHECK(m.rental_rate <= 1.0 + 1e-12);
    CHECK(m.theoretical_alpha > 1.0);
    if (m.ratio) {
      CHECK(m.welfare > 0.0);
      CHECK(*m.ratio >= 1.0 - 1e-9);  // exact oracle dominates every algorithm
      CHECK_FALSE(m.ratio_is_bound);
    }
    if (m.algo == "exact") CHECK(m.ratio == std::optional<double>(1.0));
    if (m.algo == "rs") CHECK(m.transcript_bytes == 0);
    if (m.algo == "dpos" || m.algo == "ms") CHECK(m.transcript_bytes > 0);
    if (m.algo == "ga" || m.algo == "scpa") CHECK(m.transcript_bytes == centralized_bytes(12, 2));
  }
  CHECK(algos == std::set<std::string>{"dpos", "ms", "rs", "ga", "scpa", "exact"});

  // Trial seeds drive the instances: DPoS rows share seed with the oracle row.
  CHECK(metrics[0].seed == metrics[5].seed);
  CHECK(metrics[0].seed == trial_seed(42, 0, 0));
}

TEST_CASE("same spec gives identical output; jobs do not change it") {
  ExperimentSpec spec = small_spec();
  const std::string first = trials_csv(run_trials(spec));
  CHECK(first == trials_csv(run_trials(spec)));
  spec.jobs = 3;
  CHECK(first == trials_csv(run_trials(spec)));
}

TEST_CASE("LP oracle rows are marked as bounds") {
  ExperimentSpec spec = small_spec();
  spec.algorithms = {Algorithm::dpos, Algorithm::oracle};
  spec.oracle = OracleMode::lp;
  for (const TrialMetrics& m : run_trials(spec)) {
    if (m.algo == "dpos" && m.ratio) CHECK(m.ratio_is_bound);
    if (m.algo == "dpos") continue;
    CHECK(m.algo == "lp");
  }
}

TEST_CASE("tenant sweep: median DPoS welfare grows with N") {
  ExperimentSpec spec;
  spec.algorithms = {Algorithm::dpos};
  spec.axis = SweepAxis::tenants;
  spec.values = parse_sweep_values("10,50,100", SweepAxis::tenants);
  spec.trials = 40;
  spec.timing = false;
  const auto summary = aggregate(run_trials(spec));
  REQUIRE(summary.size() == 3);
  CHECK(summary[0].axis_value == "10");
  CHECK(summary[0].welfare_median <= summary[1].welfare_median);
  CHECK(summary[1].welfare_median <= summary[2].welfare_median);
}

TEST_CASE("aggregation") {
  CHECK(trials_csv({}) == std::string(kTrialsCsvHeader) + "\n");
  CHECK(aggregate({}).empty());

  TrialMetrics one;
  one.algo = "dpos";
  one.axis_value = "100";
  one.welfare = 2.5;
  one.rental_rate = 0.4;
  one.ratio = 1.5;
  one.theoretical_alpha = 3.0;
  one.runtime_ns = 1000;
  one.transcript_bytes = 64;
  const auto rows = aggregate({one});
  REQUIRE(rows.size() == 1);
  const SummaryRow& r = rows[0];
  CHECK(r.count == 1);
  CHECK(r.welfare_mean == 2.5);
  CHECK(r.welfare_median == 2.5);
  CHECK(r.welfare_p05 == 2.5);
  CHECK(r.welfare_p95 == 2.5);
  CHECK(r.ratio_mean == 1.5);
  CHECK(r.ratio_max == 1.5);
  CHECK(r.ratio_above_alpha == 0);
  CHECK(r.runtime_rel_dpos == std::optional<double>(1.0));
  CHECK(r.transcript_bytes_mean == 64.0);

  TrialMetrics zero = one;
  zero.welfare = 0.0;
  zero.ratio.reset();
  TrialMetrics high = one;
  high.ratio = 4.0;
  const auto mixed = aggregate({one, zero, high});
  REQUIRE(mixed.size() == 1);
  CHECK(mixed[0].ratio_count == 2);
  CHECK(mixed[0].ratio_undefined == 1);
  CHECK(mixed[0].ratio_above_alpha == 1);
  CHECK(mixed[0].ratio_median == doctest::Approx(2.75));
}

TEST_CASE("trials CSV round trip") {
  const auto metrics = run_trials(small_spec());
  const auto back = parse_trials_csv(trials_csv(metrics));
  REQUIRE(back.size() == metrics.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].trial == metrics[i].trial);
    CHECK(back[i].algo == metrics[i].algo);
    CHECK(back[i].seed == metrics[i].seed);
    CHECK(back[i].welfare == metrics[i].welfare);
    CHECK(back[i].rental_rate == metrics[i].rental_rate);
    CHECK(back[i].ratio == metrics[i].ratio);
    CHECK(back[i].theoretical_alpha == metrics[i].theoretical_alpha);
    CHECK(back[i].transcript_bytes == metrics[i].transcript_bytes);
  }
  CHECK(error_code([] { (void)parse_trials_csv("nope\n"); }) == Errc::validation);
  CHECK(error_code([] { (void)parse_trials_csv(std::string(kTrialsCsvHeader) + "\n1,2\n"); }) == Errc::validation);
}

TEST_CASE("emit writes every artifact") {
  ExperimentSpec spec = small_spec();
  spec.trials = 2;
  spec.transcripts = true;
  const auto metrics = run_trials(spec);
  const auto summary = aggregate(metrics);
  const auto dir = std::filesystem::temp_directory_path() / "dpos_emit_test";
  std::filesystem::remove_all(dir);
  emit(summary, metrics, spec.axis, {dir, true});
  CHECK(read_file(dir / "trials.csv") == trials_csv(metrics));
  CHECK(read_file(dir / "summary.csv") == summary_csv(summary));
  const auto plot = nlohmann::json::parse(read_file(dir / "plot.json"));
  CHECK(plot["axis"] == "n");
  CHECK(plot["welfare"]["dpos"].size() == 1);
  const auto transcript = dir / "transcripts" / "trial_0_dpos.jsonl";
  REQUIRE(std::filesystem::exists(transcript));
  CHECK(validate_transcript_text(read_file(transcript)).empty());
  std::filesystem::remove_all(dir);

  CHECK(error_code([&] { emit(summary, metrics, spec.axis, {"/proc/no/such/dir", false}); }) == Errc::io);
}
