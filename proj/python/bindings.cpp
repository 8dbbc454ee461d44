#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <numeric>

#include "dpos/baselines.hpp"
#include "dpos/harness.hpp"
#include "dpos/oracle.hpp"
#include "dpos/pricing.hpp"
#include "dpos/protocol.hpp"
#include "dpos/transcript.hpp"
#include "dpos/verify.hpp"
#include "dpos/workload.hpp"

namespace py = pybind11;
using namespace dpos;

namespace {

double to_float(const ExtendedValue& v) {
  if (v.is_pos_inf()) return std::numeric_limits<double>::infinity();
  if (v.is_neg_inf()) return -std::numeric_limits<double>::infinity();
  return v.value();
}

std::string dumps(const py::object& obj) {
  return py::module_::import("json").attr("dumps")(obj).cast<std::string>();
}

py::object loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

std::vector<std::size_t> order_or_identity(const Instance& inst, std::optional<std::vector<std::size_t>> order) {
  if (order) return *order;
  std::vector<std::size_t> ident(inst.tenants());
  std::iota(ident.begin(), ident.end(), 0);
  return ident;
}

py::array_t<double> demand_array(const Instance& inst) {
  py::array_t<double> out({inst.tenants(), inst.resources()});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t n = 0; n < inst.tenants(); ++n) {
    for (std::size_t c = 0; c < inst.resources(); ++c) view(n, c) = inst.demands(n, c);
  }
  return out;
}

Instance make_instance(const MarketSetup& market, py::array_t<double, py::array::c_style | py::array::forcecast> demands,
                       std::vector<double> valuations) {
  const std::size_t C = market.resource_count();
  if (demands.ndim() != 2 && !(demands.ndim() == 1 && demands.size() == 0)) {
    throw Error(Errc::invalid_argument, "demands must be a 2-D array (tenants x resources)");
  }
  const std::size_t N = demands.ndim() == 2 ? static_cast<std::size_t>(demands.shape(0)) : 0;
  if (N > 0 && static_cast<std::size_t>(demands.shape(1)) != C) {
    throw Error(Errc::invalid_argument, "demands must have one column per resource");
  }
  if (valuations.size() != N) throw Error(Errc::invalid_argument, "one valuation per demand row is required");
  std::vector<double> data(demands.data(), demands.data() + N * C);
  return {market, DemandMatrix(N, C, std::move(data)), std::move(valuations)};
}

py::dict session_dict(const SessionResult& r, const Instance& inst) {
  py::dict d;
  d["welfare"] = social_welfare(inst, r.allocation);
  d["accepted"] = r.allocation.accepted;
  d["utilization"] = r.allocation.utilization;
  d["payments"] = r.payments;
  d["revenue"] = r.ledger.revenue;
  d["final_prices"] = r.certificate.final_prices;
  d["surplus"] = r.certificate.surplus;
  d["dual_objective"] = dual_objective(inst, r.certificate);
  d["transcript"] = encode_transcript(r.ledger.transcript);
  return d;
}

py::dict baseline_dict(const BaselineResult& r) {
  py::dict d;
  d["welfare"] = r.welfare;
  d["accepted"] = r.accepted;
  d["utilization"] = r.utilization;
  d["payments"] = r.payments;
  d["rounds"] = r.rounds;
  return d;
}

py::dict metrics_dict(const TrialMetrics& m) {
  py::dict d;
  d["point"] = m.point;
  d["axis_value"] = m.axis_value;
  d["trial"] = m.trial;
  d["algo"] = m.algo;
  d["N"] = m.tenants;
  d["C"] = m.resources;
  d["seed"] = m.seed;
  d["welfare"] = m.welfare;
  d["rental_rate"] = m.rental_rate;
  d["rental_rates"] = m.rental_rates;
  d["ratio"] = m.ratio ? py::object(py::float_(*m.ratio)) : py::object(py::none());
  d["ratio_is_bound"] = m.ratio_is_bound;
  d["theoretical_alpha"] = m.theoretical_alpha;
  d["runtime_ns"] = m.runtime_ns;
  d["transcript_bytes"] = m.transcript_bytes;
  if (!m.transcript.empty()) d["transcript"] = m.transcript;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dpos, m) {
  m.doc() = "Posted-price network slicing simulator";

  py::register_exception<Error>(m, "DposError", PyExc_ValueError);

  py::class_<MarketSetup>(m, "MarketSetup")
      .def(py::init([](std::vector<double> q, std::vector<double> lower, std::vector<double> upper) {
             MarketSetup s{std::move(q), std::move(lower), std::move(upper)};
             validate_setup(s);
             return s;
           }),
           py::arg("cost_coeffs"), py::arg("lower_bounds"), py::arg("upper_bounds"))
      .def_readonly("cost_coeffs", &MarketSetup::cost_coeffs)
      .def_readonly("lower_bounds", &MarketSetup::lower_bounds)
      .def_readonly("upper_bounds", &MarketSetup::upper_bounds)
      .def_property_readonly("resources", &MarketSetup::resource_count);

  py::class_<Instance>(m, "Instance")
      .def(py::init(&make_instance), py::arg("market"), py::arg("demands"), py::arg("valuations"))
      .def_readonly("market", &Instance::market)
      .def_readonly("valuations", &Instance::valuations)
      .def_property_readonly("demands", &demand_array)
      .def_property_readonly("tenants", &Instance::tenants)
      .def_property_readonly("resources", &Instance::resources)
      .def("to_json", [](const Instance& i) { return export_instance(i); })
      .def_static("from_json", &import_instance)
      .def("__eq__", [](const Instance& a, const Instance& b) { return a == b; });

  m.def(
      "generate_instance",
      [](const py::kwargs& config) { return generate_instance(config_from_json(dumps(config))); },
      "Synthetic instance; keyword arguments use the JSON config keys (tenants, resources, "
      "demand_mean, pay_level=[lo, hi], cost_range=[lo, hi], seed, ...).");
  m.def("default_config", [] { return loads(config_to_json(GenConfig{})); });
  m.def("validate_instance", [](const Instance& inst) {
    std::vector<std::string> out;
    for (const InstanceViolation& v : validate_instance(inst)) out.push_back(v.reason);
    return out;
  });

  py::class_<PricingSchedule>(m, "PricingSchedule")
      .def(py::init<const MarketSetup&>(), py::arg("market"))
      .def("price", [](const PricingSchedule& s, std::size_t c, double y) { return to_float(s.price_at(c, y)); },
           py::arg("resource"), py::arg("utilization"))
      .def("threshold", &PricingSchedule::threshold, py::arg("resource"))
      .def_property_readonly("competitive_ratio", &PricingSchedule::competitive_ratio);

  m.def("tenant_decide", [](std::vector<double> prices, double valuation, std::vector<double> demand) {
    const TenantResponse r = tenant_decide({1, std::move(prices)}, valuation, demand);
    return py::make_tuple(r.decision.accept, r.decision.payment, r.surplus);
  });

  m.def(
      "run_session",
      [](const Instance& inst, std::optional<std::vector<std::size_t>> order, bool density_floor) {
        const PricingSchedule rule(inst.market);
        const auto ord = order_or_identity(inst, std::move(order));
        return session_dict(run_session(inst, rule, ord, {true, density_floor}), inst);
      },
      py::arg("instance"), py::arg("order") = py::none(), py::arg("density_floor") = false);
  m.def(
      "myopic_slicing",
      [](const Instance& inst, std::optional<std::vector<std::size_t>> order) {
        return session_dict(myopic_slicing(inst, order_or_identity(inst, std::move(order))), inst);
      },
      py::arg("instance"), py::arg("order") = py::none());
  m.def(
      "random_slicing",
      [](const Instance& inst, std::uint64_t seed, std::optional<std::vector<std::size_t>> order) {
        return baseline_dict(random_slicing(inst, order_or_identity(inst, std::move(order)), seed));
      },
      py::arg("instance"), py::arg("seed") = 0, py::arg("order") = py::none());
  m.def(
      "ga_heuristic",
      [](const Instance& inst, std::uint64_t seed, std::size_t population, std::size_t generations) {
        GaParams p;
        p.seed = seed;
        p.population = population;
        p.generations = generations;
        return baseline_dict(ga_heuristic(inst, p));
      },
      py::arg("instance"), py::arg("seed") = 0, py::arg("population") = 100, py::arg("generations") = 200);
  m.def("scpa_adapted", [](const Instance& inst) { return baseline_dict(scpa_adapted(inst)); });

  m.def(
      "offline_exact",
      [](const Instance& inst, const std::string& method, std::uint64_t node_budget) {
        ExactOptions o;
        o.node_budget = node_budget;
        if (method == "exhaustive") o.path = ExactOptions::Path::exhaustive;
        else if (method == "bnb") o.path = ExactOptions::Path::branch_and_bound;
        else if (method != "auto") throw Error(Errc::invalid_argument, "method must be auto, exhaustive or bnb");
        const OracleResult r = offline_exact(inst, o);
        py::dict d;
        d["objective"] = r.objective;
        d["decisions"] = r.decisions;
        d["method"] = std::string(to_string(r.method));
        d["optimal"] = r.optimal;
        d["upper_bound"] = r.upper_bound;
        d["nodes"] = r.nodes;
        return d;
      },
      py::arg("instance"), py::arg("method") = "auto", py::arg("node_budget") = 5'000'000);
  m.def("lp_upper_bound", &lp_upper_bound, py::arg("instance"));
  m.def("social_welfare", [](const Instance& inst, const std::vector<bool>& accepted) {
    return social_welfare(inst, make_allocation(inst, accepted));
  });

  m.def("validate_transcript", [](const std::string& text) {
    std::vector<std::pair<std::size_t, std::string>> out;
    for (const SchemaViolation& v : validate_transcript_text(text)) out.emplace_back(v.line, v.reason);
    return out;
  });

  m.def(
      "run_experiment",
      [](const py::object& spec) {
        const std::string text = py::isinstance<py::str>(spec) ? spec.cast<std::string>() : dumps(spec);
        const ExperimentSpec parsed = spec_from_json(text);
        std::vector<TrialMetrics> metrics;
        {
          py::gil_scoped_release release;
          metrics = run_trials(parsed);
        }
        py::list rows;
        for (const TrialMetrics& t : metrics) rows.append(metrics_dict(t));
        return rows;
      },
      py::arg("spec"), "Runs an experiment spec (dict or JSON text) and returns one dict per trial row.");
  m.def(
      "summarize",
      [](const py::list& rows) {
        std::vector<TrialMetrics> metrics;
        for (const py::handle& h : rows) {
          const py::dict d = h.cast<py::dict>();
          TrialMetrics t;
          t.point = d["point"].cast<std::size_t>();
          t.axis_value = d["axis_value"].cast<std::string>();
          t.algo = d["algo"].cast<std::string>();
          t.welfare = d["welfare"].cast<double>();
          t.rental_rate = d["rental_rate"].cast<double>();
          if (!d["ratio"].is_none()) t.ratio = d["ratio"].cast<double>();
          t.theoretical_alpha = d["theoretical_alpha"].cast<double>();
          t.runtime_ns = d["runtime_ns"].cast<std::uint64_t>();
          t.transcript_bytes = d["transcript_bytes"].cast<std::uint64_t>();
          metrics.push_back(std::move(t));
        }
        return summary_csv(aggregate(metrics));
      },
      py::arg("rows"), "summary.csv text for trial rows returned by run_experiment.");
}
