#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dpos/harness.hpp"
#include "dpos/oracle.hpp"
#include "dpos/transcript.hpp"
#include "dpos/verify.hpp"
#include "dpos/workload.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dpos::Error(dpos::Errc::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw dpos::Error(dpos::Errc::io, "cannot write " + path);
}

bool on_off(const std::string& value, const char* flag) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw dpos::Error(dpos::Errc::validation, std::string(flag) + " expects on or off, got '" + value + "'");
}

std::pair<double, double> range(const std::string& text, const char* flag) {
  const auto values = dpos::parse_sweep_values(text, dpos::SweepAxis::pay_level);
  if (values.size() != 1) throw dpos::Error(dpos::Errc::validation, std::string(flag) + " expects lo:hi");
  return {values[0].lo, values[0].hi};
}

// Workload overrides shared by `sweep` and `generate`.
struct WorkloadFlags {
  std::size_t tenants = 100;
  std::size_t resources = 3;
  std::optional<double> demand_mean, demand_std, subscriber_mean, subscriber_std;
  std::optional<double> free_fraction, pyramid_ratio, bound_margin, participation;
  std::string pay_level, qos_top, cost_range;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n", tenants, "Number of tenants")->capture_default_str();
    cmd->add_option("--c", resources, "Number of resource types")->capture_default_str();
    cmd->add_option("--demand-mean", demand_mean, "Mean per-resource demand (default 1/N)");
    cmd->add_option("--demand-std", demand_std, "Demand standard deviation (default 1/N^2)");
    cmd->add_option("--subscriber-mean", subscriber_mean, "Mean subscriber count per tenant");
    cmd->add_option("--subscriber-std", subscriber_std, "Subscriber count standard deviation");
    cmd->add_option("--pay-level", pay_level, "Pay level range lo:hi");
    cmd->add_option("--qos-top", qos_top, "Top QoS level range lo:hi");
    cmd->add_option("--free-fraction", free_fraction, "Share of non-paying subscribers");
    cmd->add_option("--pyramid-ratio", pyramid_ratio, "Weight ratio between consecutive QoS levels");
    cmd->add_option("--cost-range", cost_range, "Cost coefficient range as fractions of the lower bound, lo:hi");
    cmd->add_option("--bound-margin", bound_margin, "Relative slack added around the density bounds");
    cmd->add_option("--participation", participation, "Probability that a tenant uses a given resource");
  }

  dpos::GenConfig apply(dpos::GenConfig config) const {
    config.tenants = tenants;
    config.resources = resources;
    if (demand_mean) config.demand_mean = *demand_mean;
    if (demand_std) config.demand_std = *demand_std;
    if (subscriber_mean) config.subscriber_mean = *subscriber_mean;
    if (subscriber_std) config.subscriber_std = *subscriber_std;
    if (free_fraction) config.free_fraction = *free_fraction;
    if (pyramid_ratio) config.pyramid_ratio = *pyramid_ratio;
    if (bound_margin) config.bound_margin = *bound_margin;
    if (participation) config.participation = *participation;
    if (!pay_level.empty()) std::tie(config.pay_level_min, config.pay_level_max) = range(pay_level, "--pay-level");
    if (!qos_top.empty()) std::tie(config.qos_top_min, config.qos_top_max) = range(qos_top, "--qos-top");
    if (!cost_range.empty()) {
      std::tie(config.cost_low_frac, config.cost_high_frac) = range(cost_range, "--cost-range");
    }
    return config;
  }
};

void print_summary(const std::vector<dpos::SummaryRow>& summary) {
  std::printf("%-12s %-7s %6s %14s %14s %10s %10s %10s %8s\n", "point", "algo", "trials", "welfare_mean",
              "welfare_med", "rental", "ratio_med", "ratio_max", "alpha");
  for (const auto& r : summary) {
    std::printf("%-12s %-7s %6zu %14.6g %14.6g %10.4f ", r.axis_value.c_str(), r.algo.c_str(), r.count,
                r.welfare_mean, r.welfare_median, r.rental_rate_mean);
    if (r.ratio_count > 0) {
      std::printf("%10.4f %10.4f ", r.ratio_median, r.ratio_max);
    } else {
      std::printf("%10s %10s ", "-", "-");
    }
    std::printf("%8.4f\n", r.theoretical_alpha_mean);
  }
}

int execute(const dpos::ExperimentSpec& spec, const std::string& out_dir) {
  const auto metrics = dpos::run_trials(spec);
  const auto summary = dpos::aggregate(metrics);
  print_summary(summary);
  if (!out_dir.empty()) {
    dpos::emit(summary, metrics, spec.axis, {out_dir, spec.transcripts});
    std::printf("wrote %s\n", out_dir.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posted-price network slicing simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON spec");
  std::string spec_path, run_out;
  std::optional<std::size_t> run_jobs, run_trials;
  std::string run_timing;
  run->add_option("--spec", spec_path, "Experiment spec (JSON)")->required();
  run->add_option("--out", run_out, "Output directory");
  run->add_option("--jobs", run_jobs, "Worker threads");
  run->add_option("--trials", run_trials, "Override the trial count");
  run->add_option("--timing", run_timing, "on|off; off zeroes runtime_ns for byte-stable output");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Sweep one workload parameter");
  WorkloadFlags sweep_flags;
  sweep_flags.attach(sweep);
  std::string algos = "dpos,ms,rs,ga,scpa,oracle", axis = "n", values, oracle = "auto", transcripts = "off",
              timing = "on", sweep_out;
  std::size_t trials = 1000, jobs = 1;
  std::uint64_t seed = 1, node_budget = 5'000'000;
  sweep->add_option("--algos", algos, "Comma-separated: dpos, ms, rs, ga, scpa, oracle")->capture_default_str();
  sweep->add_option("--axis", axis, "Swept parameter: n, c, mu, q or pay")->capture_default_str();
  sweep->add_option("--values", values, "Comma-separated values; q and pay take lo:hi pairs");
  sweep->add_option("--trials", trials, "Trials per sweep point")->capture_default_str();
  sweep->add_option("--seed", seed, "Base seed")->capture_default_str();
  sweep->add_option("--oracle", oracle, "exact, lp or auto")->capture_default_str();
  sweep->add_option("--node-budget", node_budget, "Branch-and-bound node budget")->capture_default_str();
  sweep->add_option("--transcripts", transcripts, "on|off")->capture_default_str();
  sweep->add_option("--timing", timing, "on|off")->capture_default_str();
  sweep->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
  sweep->add_option("--out", sweep_out, "Output directory");

  // verify
  auto* verify = app.add_subcommand("verify", "Run randomized invariant suites, or validate a transcript");
  std::size_t sessions = 10000, setups = 1000, instances = 500;
  std::uint64_t verify_seed = 1;
  std::string transcript_path;
  verify->add_option("--sessions", sessions, "Random sessions for the protocol invariants")->capture_default_str();
  verify->add_option("--setups", setups, "Random setups for the terminal price identity")->capture_default_str();
  verify->add_option("--instances", instances, "Small instances for the competitive bound and oracle checks")
      ->capture_default_str();
  verify->add_option("--seed", verify_seed, "Base seed")->capture_default_str();
  verify->add_option("--transcript", transcript_path, "Only validate this JSONL transcript");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Solve the offline welfare problem for one instance");
  std::string instance_path, method = "auto";
  oracle_cmd->add_option("--instance", instance_path, "Instance JSON")->required();
  oracle_cmd->add_option("--method", method, "auto, exhaustive, bnb or lp")->capture_default_str();

  // generate
  auto* generate = app.add_subcommand("generate", "Write one synthetic instance as JSON");
  WorkloadFlags gen_flags;
  gen_flags.attach(generate);
  std::uint64_t gen_seed = 1;
  std::string gen_out = "-";
  generate->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  generate->add_option("--out", gen_out, "Output file, - for stdout")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*run) {
      dpos::ExperimentSpec spec = dpos::spec_from_json(read_file(spec_path));
      if (run_jobs) spec.jobs = *run_jobs;
      if (run_trials) spec.trials = *run_trials;
      if (!run_timing.empty()) spec.timing = on_off(run_timing, "--timing");
      return execute(spec, run_out);
    }
    if (*sweep) {
      dpos::ExperimentSpec spec;
      spec.algorithms = dpos::parse_algorithm_list(algos);
      spec.base = sweep_flags.apply(spec.base);
      spec.axis = dpos::parse_sweep_axis(axis);
      if (!values.empty()) spec.values = dpos::parse_sweep_values(values, spec.axis);
      spec.trials = trials;
      spec.seed = seed;
      spec.oracle = dpos::parse_oracle_mode(oracle);
      spec.node_budget = node_budget;
      spec.transcripts = on_off(transcripts, "--transcripts");
      spec.timing = on_off(timing, "--timing");
      spec.jobs = jobs;
      return execute(spec, sweep_out);
    }
    if (*verify) {
      if (!transcript_path.empty()) {
        std::ifstream in(transcript_path);
        if (!in) throw dpos::Error(dpos::Errc::io, "cannot open " + transcript_path);
        const auto problems = dpos::validate_transcript(in);
        for (const auto& p : problems) std::printf("line %zu: %s\n", p.line, p.reason.c_str());
        std::printf("%s: %s\n", transcript_path.c_str(), problems.empty() ? "valid" : "INVALID");
        return problems.empty() ? 0 : kExitValidation;
      }
      const dpos::SuiteReport reports[] = {
          dpos::check_terminal_identity(setups, verify_seed),
          dpos::check_session_invariants(sessions, verify_seed),
          dpos::check_competitive_bound(instances, verify_seed),
          dpos::check_oracle_agreement(instances, verify_seed),
          dpos::check_transcript_schema(std::max<std::size_t>(sessions / 100, 1), verify_seed),
      };
      bool ok = true;
      for (const auto& r : reports) {
        std::printf("[%s] %s\n", r.ok() ? "PASS" : "FAIL", r.summary().c_str());
        ok = ok && r.ok();
      }
      return ok ? 0 : kExitValidation;
    }
    if (*oracle_cmd) {
      const dpos::Instance instance = dpos::import_instance(read_file(instance_path));
      nlohmann::json j;
      if (method == "lp") {
        j["method"] = "lp-upper-bound";
        j["objective"] = dpos::lp_upper_bound(instance);
      } else {
        dpos::ExactOptions options;
        if (method == "exhaustive") {
          options.path = dpos::ExactOptions::Path::exhaustive;
        } else if (method == "bnb") {
          options.path = dpos::ExactOptions::Path::branch_and_bound;
        } else if (method != "auto") {
          throw dpos::Error(dpos::Errc::validation, "unknown oracle method '" + method + "'");
        }
        const dpos::OracleResult r = dpos::offline_exact(instance, options);
        j["method"] = std::string(dpos::to_string(r.method));
        j["objective"] = r.objective;
        j["optimal"] = r.optimal;
        j["upper_bound"] = r.upper_bound;
        j["nodes"] = r.nodes;
        std::vector<std::size_t> accepted;
        for (std::size_t n = 0; n < r.decisions.size(); ++n) {
          if (r.decisions[n]) accepted.push_back(n);
        }
        j["accepted"] = accepted;
      }
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (*generate) {
      dpos::GenConfig config = gen_flags.apply({});
      config.seed = gen_seed;
      const dpos::Instance instance = dpos::generate_instance(config);
      write_file(gen_out, dpos::export_instance(instance, config) + "\n");
      return 0;
    }
  } catch (const dpos::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", std::string(dpos::to_string(e.code())).c_str(), e.what());
    return e.code() == dpos::Errc::io ? kExitIo : kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
