#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "selfheal/faults.hpp"
#include "selfheal/netlist.hpp"
#include "selfheal/sim.hpp"
#include "selfheal/trace.hpp"

namespace selfheal {

// One scenario file (JSON). Relative paths resolve against the file's folder.
struct ScenarioConfig {
  std::string id;
  std::filesystem::path netlist;
  std::filesystem::path stimulus;
  std::optional<std::filesystem::path> schedule;
  PiGains gains{2, 1, 1, 4};
  int dwc_threshold = 2;
  int horizon = 8;  // half-ticks, used by property checks
  std::int64_t until_ns = 0;
  int layers = 3;
  int scan_period = 8;
  int heal_settle = 7;
  std::vector<std::int64_t> layer_trigger_ns;
  bool probe_blocks = true;
};

ScenarioConfig parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario(const std::filesystem::path& file);

// Everything needed to run: parsed inputs plus a digest of the files read.
struct LoadedScenario {
  ScenarioConfig config;
  Netlist netlist;
  Mapping mapping;
  Stimulus stimulus;
  FaultSchedule schedule;
  std::string digest;  // 16 hex digits, FNV-1a 64
};

LoadedScenario prepare(const ScenarioConfig& config, const std::string& config_bytes = {});
LoadedScenario prepare(const std::filesystem::path& file);

SimConfig sim_config(const LoadedScenario& s);

// FNV-1a 64 over the concatenated bytes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull);

struct ScenarioResult {
  Trace trace;
  Trace golden;
  std::vector<InjectionRecord> injections;
  int masked = 0;
  int healed = 0;
  int unhealed = 0;
  std::vector<std::int64_t> heal_latencies_ns;
  bool golden_equivalent = true;
};

// Runs the faulty and the fault-free simulation and classifies every
// injection as masked, healed or unhealed.
ScenarioResult run_scenario(const LoadedScenario& s);

struct CampaignRow {
  std::string scenario;
  int injected = 0;
  int masked = 0;
  int healed = 0;
  int unhealed = 0;
  std::vector<std::int64_t> heal_latencies_ns;
  bool golden_equivalent = true;
};

struct CampaignReport {
  std::vector<CampaignRow> rows;  // in scenario-id order
  std::string to_csv() const;
};

// Scenarios run on up to `threads` workers (0 = hardware concurrency).
CampaignReport run_campaign(const std::vector<std::filesystem::path>& files, unsigned threads = 0);

std::string read_file(const std::filesystem::path& file);

}  // namespace selfheal
