#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfheal/fabric.hpp"
#include "selfheal/faults.hpp"
#include "selfheal/healing.hpp"
#include "selfheal/netlist.hpp"
#include "selfheal/trace.hpp"

namespace selfheal {

// Piecewise-constant input waveforms: port name -> (time_ns, value) entries.
struct Stimulus {
  std::map<std::string, std::vector<std::pair<std::int64_t, Word>>> ports;

  void set(const std::string& port, std::int64_t time_ns, Word value);
};

// Lines `time_ns,port,value`, '#' comments. Every port named by the netlist
// must start at t=0 and times must strictly increase per port.
Stimulus parse_stimulus(std::string_view text);
void validate_stimulus(const Stimulus& stim, const Netlist& netlist);

struct SimConfig {
  PiGains gains{2, 1, 1, 4};
  int dwc_threshold = 2;
  int scan_period = 8;  // half-ticks between firing starts of one cell
  int heal_settle = 7;  // half-ticks from heal actions to the substitute's first firing
  std::vector<std::int64_t> layer_trigger_ns;  // first firing per layer
  bool probe_blocks = true;  // emit <block>.lat<i>/.done/.out signals
  std::map<std::string, std::string> metadata;
};

struct InjectionRecord {
  int fault_id = 0;
  FaultKind kind = FaultKind::TRANSIENT_REG;
  std::int64_t time_ns = 0;
  CellAddr cell;
  std::string target;
  bool no_effect = false;    // target already DEAD or not resolvable
  bool unmaskable = false;   // transient that defeated the HRU
};

// Lockstep half-tick engine. Phase order within one half-tick:
//   1 stimulus edges   2 fault injection   3 HRU stage   4 GFB completion/start
//   5 DWC flags        6 healing monitor   7 heal actions  8 output latch
// and trace rows for all of them.
class Simulator {
 public:
  Simulator(Netlist netlist, Mapping mapping, Stimulus stimulus, FaultSchedule schedule,
            SimConfig config);

  void step();
  // Steps through every half-tick up to and including `until_ns`.
  Trace run(std::int64_t until_ns);

  std::int64_t half_tick() const { return tick_; }
  std::int64_t now_ns() const { return tick_ * kNsPerHalfTick; }
  const Fabric& fabric() const { return fabric_; }
  const HealingLayerState& healing() const { return healing_; }
  const Netlist& netlist() const { return netlist_; }
  const std::vector<InjectionRecord>& injections() const { return injections_; }
  const Trace& trace() const { return trace_; }

  // Current value of an output port, if valid.
  std::optional<Word> output(std::string_view name) const;

 private:
  void apply_stimulus(std::int64_t t);
  void inject(const Fault& fault, std::int64_t t);
  void apply_actions(const MonitorOutcome& outcome, std::int64_t t);
  std::string block_name(const CellAddr& cell) const;
  void pulse(const std::string& name, std::int64_t t);

  Netlist netlist_;
  Mapping mapping_;
  Stimulus stimulus_;
  FaultSchedule schedule_;
  SimConfig config_;
  Fabric fabric_;
  HealingLayerState healing_;
  Trace trace_;
  std::int64_t tick_ = 0;
  size_t next_fault_ = 0;

  std::map<CellAddr, std::string> role_names_;
  std::map<std::pair<int, int>, ReplicaUpsets> pending_upsets_;  // (ordinal, hru)
  std::vector<std::string> raised_pulses_;
  std::map<std::string, std::string> last_signal_;
  std::map<CellAddr, CellAddr> heal_pending_;  // substitute -> replaced cell
  std::vector<InjectionRecord> injections_;
};

// Fault-free reference run.
Trace golden_run(const Netlist& netlist, const Mapping& mapping, const Stimulus& stimulus,
                 std::int64_t until_ns, const SimConfig& config);

}  // namespace selfheal
