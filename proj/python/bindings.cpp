#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "selfheal/analysis.hpp"
#include "selfheal/error.hpp"
#include "selfheal/netlist.hpp"
#include "selfheal/property.hpp"
#include "selfheal/scenario.hpp"
#include "selfheal/sim.hpp"

namespace py = pybind11;
using namespace selfheal;

namespace {

py::tuple ratio(const Ratio& r) { return py::make_tuple(r.numerator(), r.denominator()); }

py::dict run(const std::filesystem::path& file) {
  const auto s = prepare(file);
  ScenarioResult r;
  {
    py::gil_scoped_release nogil;
    r = run_scenario(s);
  }
  py::dict d;
  d["scenario"] = s.config.id;
  d["trace"] = r.trace.to_csv();
  d["injected"] = r.injections.size();
  d["masked"] = r.masked;
  d["healed"] = r.healed;
  d["unhealed"] = r.unhealed;
  d["heal_latencies_ns"] = r.heal_latencies_ns;
  d["golden_equivalent"] = r.golden_equivalent;
  return d;
}

std::string golden(const std::filesystem::path& file) {
  const auto s = prepare(file);
  py::gil_scoped_release nogil;
  return golden_run(s.netlist, s.mapping, s.stimulus, s.config.until_ns, sim_config(s)).to_csv();
}

std::string campaign(const std::vector<std::filesystem::path>& files, unsigned threads) {
  py::gil_scoped_release nogil;
  return run_campaign(files, threads).to_csv();
}

py::list table(int n, std::int64_t spf) {
  py::list out;
  for (const auto& r : architecture_table(n, spf)) {
    py::dict d;
    d["architecture"] = r.name;
    d["functional"] = ratio(r.functional);
    d["spares"] = ratio(r.spares);
    d["routing"] = ratio(r.routing);
    d["coverage"] = ratio(r.coverage);
    d["overhead_pct"] = ratio(r.overhead);
    out.append(d);
  }
  return out;
}

py::tuple check(const std::string& trace_csv, const std::string& prop,
                const std::optional<std::string>& golden_csv) {
  const Trace t = Trace::from_csv(trace_csv);
  std::optional<Trace> g;
  if (golden_csv) g = Trace::from_csv(*golden_csv);
  const auto v = check_property(t, parse_property(prop), g ? &*g : nullptr);
  return py::make_tuple(std::string(to_string(v.kind)), v.counterexample_ns);
}

std::string place_text(const std::string& netlist_text, int layers) {
  const auto net = parse_netlist(netlist_text);
  return place(net, layers).to_text(net);
}

py::list latency(const std::string& trace_csv) {
  py::list out;
  for (const auto& l : recovery_latency(Trace::from_csv(trace_csv))) {
    py::dict d;
    d["injected_ns"] = l.injected_ns;
    d["target"] = l.target;
    d["healed_ns"] = l.healed_ns;
    d["latency_ns"] = l.latency_ns;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Self-healing fabric simulator";

  static py::exception<Error> error(m, "SelfHealError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.def("run_scenario", &run, py::arg("scenario"),
        "Run a scenario JSON file; returns the trace CSV and the injection outcome counts.");
  m.def("golden", &golden, py::arg("scenario"), "Fault-free trace CSV of a scenario.");
  m.def("campaign", &campaign, py::arg("scenarios"), py::arg("threads") = 0,
        "Run several scenarios and return the summary CSV.");
  m.def("metrics_table", &table, py::arg("n"), py::arg("spf"),
        "Architecture comparison rows; rationals as (numerator, denominator).");
  m.def("render_truncated",
        [](std::int64_t num, std::int64_t den, int digits) {
          return render_truncated(Ratio(num, den), digits);
        },
        py::arg("num"), py::arg("den"), py::arg("digits") = 3);
  m.def("check_property", &check, py::arg("trace"), py::arg("prop"),
        py::arg("golden") = py::none(), "Returns (verdict, counterexample_ns or None).");
  m.def("place", &place_text, py::arg("netlist"), py::arg("layers"),
        "Placement of a netlist text onto the fabric.");
  m.def("recovery_latency", &latency, py::arg("trace"));
}
