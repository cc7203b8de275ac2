#include "selfheal/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "selfheal/error.hpp"

namespace selfheal {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

const std::set<std::string> kKeys = {
    "id",      "netlist",     "stimulus",         "schedule",    "gains",
    "dwc_threshold", "horizon", "until_ns",       "layers",      "scan_period",
    "heal_settle", "layer_trigger_ns", "probe_blocks", "description"};

template <typename T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("scenario field '") + key + "': " + e.what());
  }
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text, const fs::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("scenario JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::Config, "scenario must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) throw Error(ErrorKind::Config, "unknown scenario field '" + k + "'");
  }
  for (const char* req : {"id", "netlist", "stimulus", "until_ns"}) {
    if (!j.contains(req)) throw Error(ErrorKind::Config, std::string("scenario lacks '") + req + "'");
  }
  ScenarioConfig c;
  c.id = get<std::string>(j, "id", "");
  c.netlist = base / get<std::string>(j, "netlist", "");
  c.stimulus = base / get<std::string>(j, "stimulus", "");
  if (j.contains("schedule")) c.schedule = base / get<std::string>(j, "schedule", "");
  if (j.contains("gains")) {
    const auto& g = j.at("gains");
    c.gains.kp_num = get<std::int64_t>(g, "kp_num", c.gains.kp_num);
    c.gains.kp_den = get<std::int64_t>(g, "kp_den", c.gains.kp_den);
    c.gains.ki_num = get<std::int64_t>(g, "ki_num", c.gains.ki_num);
    c.gains.ki_den = get<std::int64_t>(g, "ki_den", c.gains.ki_den);
    if (c.gains.kp_den <= 0 || c.gains.ki_den <= 0) {
      throw Error(ErrorKind::Config, "gain denominators must be positive");
    }
  }
  c.dwc_threshold = get<int>(j, "dwc_threshold", c.dwc_threshold);
  c.horizon = get<int>(j, "horizon", c.horizon);
  c.until_ns = get<std::int64_t>(j, "until_ns", 0);
  c.layers = get<int>(j, "layers", c.layers);
  c.scan_period = get<int>(j, "scan_period", c.scan_period);
  c.heal_settle = get<int>(j, "heal_settle", c.heal_settle);
  c.layer_trigger_ns = get<std::vector<std::int64_t>>(j, "layer_trigger_ns", {});
  c.probe_blocks = get<bool>(j, "probe_blocks", true);

  if (c.id.empty()) throw Error(ErrorKind::Config, "scenario id is empty");
  if (c.dwc_threshold < 1) throw Error(ErrorKind::Config, "dwc_threshold must be >= 1");
  if (c.horizon < 0) throw Error(ErrorKind::Config, "horizon must be >= 0");
  if (c.until_ns < 0 || c.until_ns % kNsPerHalfTick != 0) {
    throw Error(ErrorKind::Config, "until_ns must be a non-negative multiple of 5");
  }
  if (c.layers < 1) throw Error(ErrorKind::Config, "layers must be >= 1");
  if (c.scan_period <= kCellLatency) {
    throw Error(ErrorKind::Config, "scan_period must exceed the cell latency (7 half-ticks)");
  }
  if (c.heal_settle < 0) throw Error(ErrorKind::Config, "heal_settle must be >= 0");
  for (auto t : c.layer_trigger_ns) {
    if (t < 0 || t % kNsPerHalfTick != 0) {
      throw Error(ErrorKind::Config, "layer_trigger_ns entries must be non-negative multiples of 5");
    }
  }
  return c;
}

ScenarioConfig load_scenario(const fs::path& file) {
  return parse_scenario(read_file(file), file.parent_path());
}

LoadedScenario prepare(const ScenarioConfig& config, const std::string& config_bytes) {
  LoadedScenario s;
  s.config = config;
  const std::string net_text = read_file(config.netlist);
  const std::string stim_text = read_file(config.stimulus);
  const std::string sched_text = config.schedule ? read_file(*config.schedule) : std::string();
  s.netlist = parse_netlist(net_text);
  s.mapping = place(s.netlist, config.layers);
  s.stimulus = parse_stimulus(stim_text);
  validate_stimulus(s.stimulus, s.netlist);
  s.schedule = parse_schedule(sched_text, config.layers);

  std::uint64_t h = fnv1a64(config_bytes);
  h = fnv1a64(net_text, h);
  h = fnv1a64(stim_text, h);
  h = fnv1a64(sched_text, h);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  s.digest = buf;
  return s;
}

LoadedScenario prepare(const fs::path& file) {
  const std::string bytes = read_file(file);
  return prepare(parse_scenario(bytes, file.parent_path()), bytes);
}

SimConfig sim_config(const LoadedScenario& s) {
  SimConfig c;
  c.gains = s.config.gains;
  c.dwc_threshold = s.config.dwc_threshold;
  c.scan_period = s.config.scan_period;
  c.heal_settle = s.config.heal_settle;
  c.layer_trigger_ns = s.config.layer_trigger_ns;
  c.probe_blocks = s.config.probe_blocks;
  c.metadata["scenario"] = s.config.id;
  c.metadata["digest"] = s.digest;
  return c;
}

ScenarioResult run_scenario(const LoadedScenario& s) {
  ScenarioResult r;
  const SimConfig cfg = sim_config(s);
  Simulator sim(s.netlist, s.mapping, s.stimulus, s.schedule, cfg);
  r.trace = sim.run(s.config.until_ns);
  r.injections = sim.injections();
  r.golden = golden_run(s.netlist, s.mapping, s.stimulus, s.config.until_ns, cfg);

  std::int64_t last_heal = 0;
  for (const auto& row : r.trace.rows()) {
    if (row.kind == RowKind::EVENT && row.name == "heal_complete") last_heal = row.time_ns;
  }
  std::vector<std::string> ports;
  for (const auto& o : s.netlist.outputs) ports.push_back(o.name);
  r.golden_equivalent = signals_equivalent(r.trace, r.golden, ports, last_heal);

  for (const auto& rec : r.injections) {
    if (rec.no_effect) {
      ++r.masked;
      continue;
    }
    if (rec.kind == FaultKind::TRANSIENT_REG) {
      (rec.unmaskable || !r.golden_equivalent) ? ++r.unhealed : ++r.masked;
      continue;
    }
    const std::string cell = to_string(rec.cell);
    std::optional<std::int64_t> done;
    bool deactivated = false;
    for (const auto& row : r.trace.rows()) {
      if (row.time_ns < rec.time_ns) continue;
      if (row.kind == RowKind::HEAL && row.name == "DEACTIVATE" &&
          row.value.starts_with(cell + ",")) {
        deactivated = true;
      } else if (row.kind == RowKind::EVENT && row.name == "heal_complete" &&
                 row.value.starts_with(cell + "->")) {
        done = row.time_ns;
        break;
      }
    }
    if (done) {
      ++r.healed;
      r.heal_latencies_ns.push_back(*done - rec.time_ns);
    } else if (deactivated || !r.golden_equivalent) {
      ++r.unhealed;
    } else {
      ++r.masked;
    }
  }
  return r;
}

std::string CampaignReport::to_csv() const {
  std::ostringstream os;
  os << "scenario,injected,masked,healed,unhealed,heal_latencies_ns,golden_equivalent\n";
  for (const auto& r : rows) {
    os << r.scenario << ',' << r.injected << ',' << r.masked << ',' << r.healed << ','
       << r.unhealed << ',';
    for (size_t i = 0; i < r.heal_latencies_ns.size(); ++i) {
      if (i) os << ';';
      os << r.heal_latencies_ns[i];
    }
    os << ',' << (r.golden_equivalent ? "true" : "false") << '\n';
  }
  return os.str();
}

CampaignReport run_campaign(const std::vector<fs::path>& files, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<size_t>(1, files.size()));
  std::vector<CampaignRow> rows(files.size());
  std::vector<std::exception_ptr> errors(files.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next.fetch_add(1)) < files.size();) {
      try {
        const auto s = prepare(files[i]);
        const auto res = run_scenario(s);
        CampaignRow& row = rows[i];
        row.scenario = s.config.id;
        row.injected = static_cast<int>(res.injections.size());
        row.masked = res.masked;
        row.healed = res.healed;
        row.unhealed = res.unhealed;
        row.heal_latencies_ns = res.heal_latencies_ns;
        row.golden_equivalent = res.golden_equivalent;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  CampaignReport report;
  report.rows = std::move(rows);
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const CampaignRow& a, const CampaignRow& b) { return a.scenario < b.scenario; });
  return report;
}

}  // namespace selfheal
