// selfheal: command-line front end for the cellular fabric simulator.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selfheal/analysis.hpp"
#include "selfheal/error.hpp"
#include "selfheal/netlist.hpp"
#include "selfheal/property.hpp"
#include "selfheal/scenario.hpp"
#include "selfheal/sim.hpp"

namespace fs = std::filesystem;
using namespace selfheal;

namespace {

fs::path asset_dir() {
  if (const char* env = std::getenv("SELFHEAL_ASSETS")) return env;
  return SELFHEAL_ASSET_DIR;
}

// A path to a JSON file, or a scenario id looked up under assets/scenarios.
fs::path resolve_scenario(const std::string& arg) {
  if (fs::exists(arg) && fs::is_regular_file(arg)) return arg;
  fs::path p = asset_dir() / "scenarios" / (arg + ".json");
  if (!fs::exists(p)) throw Error(ErrorKind::Config, "no scenario '" + arg + "'");
  return p;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error(ErrorKind::Config, "cannot write " + out);
  f << text;
}

std::string prop_text(const std::string& arg) {
  return fs::exists(arg) ? read_file(arg) : arg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-healing cellular fabric simulator"};
  app.require_subcommand(1);

  std::string scenario, out, schedule;
  std::int64_t until = -1;
  auto* run = app.add_subcommand("run", "Run a scenario and write its trace");
  run->add_option("scenario", scenario, "Scenario id or JSON file")->required();
  run->add_option("-o,--out", out, "Trace file (default stdout)");
  run->add_option("--schedule", schedule, "Override the fault schedule");
  run->add_option("--until", until, "Override the end time (ns)");

  auto* golden = app.add_subcommand("golden", "Fault-free run of a scenario");
  golden->add_option("scenario", scenario, "Scenario id or JSON file")->required();
  golden->add_option("-o,--out", out, "Trace file (default stdout)");
  golden->add_option("--until", until, "Override the end time (ns)");

  std::vector<std::string> scenarios;
  unsigned threads = 0;
  auto* campaign = app.add_subcommand("campaign", "Run scenarios and summarise the outcomes");
  campaign->add_option("scenarios", scenarios, "Scenario ids or files (default: all)");
  campaign->add_option("-j,--threads", threads, "Worker threads (0 = all cores)");
  campaign->add_option("-o,--out", out, "Report file (default stdout)");

  auto* metrics = app.add_subcommand("metrics", "Coverage and area overhead");
  metrics->require_subcommand(1);
  int n = 4, n_min = 2, n_max = 16;
  std::int64_t spf = 12;
  auto* table = metrics->add_subcommand("table", "Comparison table at one array size");
  table->add_option("--n", n, "Array side")->check(CLI::PositiveNumber);
  table->add_option("--spf", spf, "Single points of failure")->check(CLI::PositiveNumber);
  auto* series = metrics->add_subcommand("series", "Coverage/overhead over array sizes");
  series->add_option("--n-min", n_min)->check(CLI::PositiveNumber);
  series->add_option("--n-max", n_max)->check(CLI::PositiveNumber);
  series->add_option("--spf", spf)->check(CLI::PositiveNumber);

  std::string trace_file, prop, golden_file;
  auto* check = app.add_subcommand("check", "Check a temporal property on a trace");
  check->add_option("--trace", trace_file, "Trace file")->required()->check(CLI::ExistingFile);
  check->add_option("--prop", prop, "Property text or file")->required();
  check->add_option("--golden", golden_file, "Golden trace for golden(sig)")
      ->check(CLI::ExistingFile);

  auto* latency = app.add_subcommand("latency", "Fault-to-recovery latency from a trace");
  latency->add_option("--trace", trace_file, "Trace file")->required()->check(CLI::ExistingFile);

  std::string netlist_file;
  int layers = 3;
  auto* placecmd = app.add_subcommand("place", "Map a netlist onto the fabric");
  placecmd->add_option("--netlist", netlist_file, "Netlist (.fbd)")
      ->required()
      ->check(CLI::ExistingFile);
  placecmd->add_option("--layers", layers, "Fabric layers")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run || *golden) {
      const bool is_run = run->parsed();
      auto cfg_path = resolve_scenario(scenario);
      const std::string bytes = read_file(cfg_path);
      auto cfg = parse_scenario(bytes, cfg_path.parent_path());
      if (!schedule.empty()) cfg.schedule = schedule;
      if (until >= 0) {
        if (until % kNsPerHalfTick != 0) throw Error(ErrorKind::Config, "--until must be a multiple of 5");
        cfg.until_ns = until;
      }
      const auto s = prepare(cfg, bytes);
      Trace t;
      if (is_run) {
        Simulator sim(s.netlist, s.mapping, s.stimulus, s.schedule, sim_config(s));
        t = sim.run(s.config.until_ns);
      } else {
        t = golden_run(s.netlist, s.mapping, s.stimulus, s.config.until_ns, sim_config(s));
      }
      emit(t.to_csv(), out);
    } else if (*campaign) {
      std::vector<fs::path> files;
      if (scenarios.empty()) {
        for (const auto& e : fs::directory_iterator(asset_dir() / "scenarios")) {
          if (e.path().extension() == ".json") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
      } else {
        for (const auto& s : scenarios) files.push_back(resolve_scenario(s));
      }
      emit(run_campaign(files, threads).to_csv(), out);
    } else if (*metrics) {
      if (*table) {
        std::cout << table_csv(n, spf);
      } else {
        if (n_min > n_max) throw Error(ErrorKind::Domain, "--n-min exceeds --n-max");
        std::cout << series_csv(n_min, n_max, spf);
      }
    } else if (*check) {
      const Trace t = Trace::from_csv(read_file(trace_file));
      std::optional<Trace> g;
      if (!golden_file.empty()) g = Trace::from_csv(read_file(golden_file));
      const auto v = check_property(t, parse_property(prop_text(prop)), g ? &*g : nullptr);
      std::cout << to_string(v.kind);
      if (v.counterexample_ns) std::cout << " at " << *v.counterexample_ns << " ns";
      std::cout << '\n';
      return v.kind == VerdictKind::HOLDS ? 0 : 1;
    } else if (*latency) {
      const Trace t = Trace::from_csv(read_file(trace_file));
      std::cout << "injected_ns,target,healed_ns,latency_ns\n";
      for (const auto& l : recovery_latency(t)) {
        std::cout << l.injected_ns << ',' << l.target << ','
                  << (l.healed_ns ? std::to_string(*l.healed_ns) : "-") << ','
                  << (l.latency_ns ? std::to_string(*l.latency_ns) : "-") << '\n';
      }
    } else if (*placecmd) {
      const auto net = parse_netlist(read_file(netlist_file));
      std::cout << place(net, layers).to_text(net);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
