#include "selfheal/sim.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "selfheal/error.hpp"

namespace selfheal {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool live(const FunctionCell& c) {
  return c.scheduled && (c.mode == CellMode::ACTIVE || c.mode == CellMode::HEALING);
}

}  // namespace

void Stimulus::set(const std::string& port, std::int64_t time_ns, Word value) {
  ports[port].emplace_back(time_ns, value);
}

Stimulus parse_stimulus(std::string_view text) {
  Stimulus s;
  std::istringstream in{std::string(text)};
  std::string buf;
  int lineno = 0;
  while (std::getline(in, buf)) {
    ++lineno;
    std::string_view line = buf;
    if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    auto c1 = line.find(',');
    auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) throw ParseError(lineno, "expected time_ns,port,value");
    auto ts = trim(line.substr(0, c1));
    auto port = trim(line.substr(c1 + 1, c2 - c1 - 1));
    auto vs = trim(line.substr(c2 + 1));
    std::int64_t t = 0;
    unsigned v = 0;
    auto r1 = std::from_chars(ts.data(), ts.data() + ts.size(), t);
    auto r2 = std::from_chars(vs.data(), vs.data() + vs.size(), v);
    if (r1.ec != std::errc() || r1.ptr != ts.data() + ts.size() || t < 0) {
      throw ParseError(lineno, "bad time");
    }
    if (r2.ec != std::errc() || r2.ptr != vs.data() + vs.size() || v > 0xFFFF) {
      throw ParseError(lineno, "bad value");
    }
    if (t % kNsPerHalfTick != 0) throw ParseError(lineno, "time not multiple of 5");
    auto& entries = s.ports[std::string(port)];
    if (!entries.empty() && entries.back().first >= t) {
      throw ParseError(lineno, "times must strictly increase per port");
    }
    entries.emplace_back(t, static_cast<Word>(v));
  }
  return s;
}

void validate_stimulus(const Stimulus& stim, const Netlist& net) {
  for (const auto& [port, entries] : stim.ports) {
    if (net.input_index(port) < 0) throw Error(ErrorKind::Config, "stimulus names unknown port '" + port + "'");
    for (size_t i = 1; i < entries.size(); ++i) {
      if (entries[i].first <= entries[i - 1].first) {
        throw Error(ErrorKind::Config, "stimulus times not increasing for '" + port + "'");
      }
    }
  }
  for (const auto& in : net.inputs) {
    auto it = stim.ports.find(in.name);
    if (it == stim.ports.end() || it->second.empty() || it->second.front().first != 0) {
      throw Error(ErrorKind::Config, "stimulus for '" + in.name + "' must start at t=0");
    }
    if (in.is_bool) {
      for (const auto& [t, v] : it->second) {
        if (v > 1) throw Error(ErrorKind::Config, "boolean port '" + in.name + "' driven with " + std::to_string(v));
      }
    }
  }
}

Simulator::Simulator(Netlist netlist, Mapping mapping, Stimulus stimulus, FaultSchedule schedule,
                     SimConfig config)
    : netlist_(std::move(netlist)),
      mapping_(std::move(mapping)),
      stimulus_(std::move(stimulus)),
      schedule_(std::move(schedule)),
      config_(std::move(config)),
      fabric_(build_fabric(netlist_, mapping_)),
      healing_(mapping_.layers) {
  validate_stimulus(stimulus_, netlist_);
  if (config_.scan_period < kCellLatency) {
    throw Error(ErrorKind::Config, "scan period shorter than the cell latency");
  }
  if (config_.dwc_threshold < 1) throw Error(ErrorKind::Config, "DWC threshold must be >= 1");
  for (size_t i = 0; i < netlist_.blocks.size(); ++i) {
    const CellAddr addr = mapping_.block_cell[i];
    role_names_[addr] = netlist_.blocks[i].name;
    auto& c = fabric_.cell(addr);
    std::int64_t trigger = 0;
    if (addr.layer < static_cast<int>(config_.layer_trigger_ns.size())) {
      trigger = config_.layer_trigger_ns[addr.layer];
    }
    if (trigger % kNsPerHalfTick != 0 || trigger < 0) {
      throw Error(ErrorKind::Config, "layer trigger time not a non-negative multiple of 5");
    }
    c.grid_origin = trigger / kNsPerHalfTick;
    c.scheduled = true;
  }
  for (const auto& [k, v] : config_.metadata) trace_.metadata()[k] = v;
}

std::string Simulator::block_name(const CellAddr& cell) const {
  auto role = fabric_.routing.role_of(cell);
  if (!role) return to_string(cell);
  return role_names_.at(*role);
}

void Simulator::pulse(const std::string& name, std::int64_t t) {
  trace_.add(t, RowKind::SIGNAL, name, "1");
  raised_pulses_.push_back(name);
}

void Simulator::apply_stimulus(std::int64_t t) {
  for (const auto& [port, entries] : stimulus_.ports) {
    for (const auto& [when, value] : entries) {
      if (when != t) continue;
      const int idx = netlist_.input_index(port);
      fabric_.ports[idx] = value;
      fabric_.port_valid[idx] = true;
      auto s = std::to_string(value);
      auto& last = last_signal_[port];
      if (last != s) {
        trace_.add(t, RowKind::SIGNAL, port, s);
        last = s;
      }
    }
  }
}

void Simulator::inject(const Fault& fault, std::int64_t t) {
  for (const auto& target : fault.targets) {
    InjectionRecord rec;
    rec.fault_id = fault.id;
    rec.kind = fault.kind;
    rec.time_ns = t;
    FaultTarget resolved = target;
    std::optional<CellAddr> cell = target.cell;
    if (target.block) {
      const int b = netlist_.block_index(*target.block);
      if (b < 0) throw Error(ErrorKind::Config, "fault names unknown block '" + *target.block + "'");
      cell = fabric_.routing.holder(mapping_.block_cell[b]);
    }
    if (!cell) {
      rec.no_effect = true;
      rec.target = to_string(target);
      trace_.add(t, RowKind::FAULT, rec.target, std::string(to_string(fault.kind)) + ":" + fault.payload());
      injections_.push_back(rec);
      continue;
    }
    if (!fabric_.contains(*cell)) {
      throw Error(ErrorKind::Config, "fault targets unknown cell " + to_string(*cell));
    }
    resolved.cell = cell;
    resolved.block.reset();
    rec.cell = *cell;
    rec.target = to_string(resolved);
    auto& c = fabric_.cell(*cell);
    rec.no_effect = c.mode == CellMode::DEAD;
    if (!rec.no_effect) {
      if (fault.kind == FaultKind::TRANSIENT_REG) {
        pending_upsets_[{cell->ordinal(), target.hru}][target.replica] ^= fault.mask;
      } else {
        auto& copy = target.gfb_copy == 0 ? c.gfb_primary : c.gfb_shadow;
        if (fault.stuck_value) copy.stuck.force1 |= fault.mask;
        else copy.stuck.force0 |= fault.mask;
      }
    }
    trace_.add(t, RowKind::FAULT, rec.target, std::string(to_string(fault.kind)) + ":" + fault.payload());
    injections_.push_back(rec);
  }
}

void Simulator::apply_actions(const MonitorOutcome& outcome, std::int64_t t) {
  std::optional<CellAddr> replaced;
  for (const auto& a : outcome.actions) {
    trace_.add(t, RowKind::HEAL, std::string(to_string(a.kind)), heal_fields(a));
    switch (a.kind) {
      case HealKind::DEACTIVATE: {
        auto& c = fabric_.cell(a.subject);
        transition(c.mode, CellMode::DEAD);
        c.busy = false;
        c.scheduled = false;
        replaced = a.subject;
        break;
      }
      case HealKind::REROUTE:
        reroute(fabric_, a.subject, *a.object);
        break;
      case HealKind::DIFFERENTIATE: {
        DifferentiationCommand cmd;
        cmd.unit = a.subject;
        cmd.syndrome = syndrome_for(a.subject);
        cmd.stem_cell = cmd.syndrome.stem_cell();
        cmd.code_slot = fabric_.routing.role_of(a.subject).value().index;
        differentiate_stem(fabric_, cmd);
        break;
      }
      case HealKind::RESTORE: {
        auto& sub = fabric_.cell(a.subject);
        if (sub.addr.kind == CellKind::T) {
          transition(sub.mode, CellMode::HEALING);
          sub.active_slot = a.code_slot.value();
        }
        const auto& dead = fabric_.cell(replaced.value());
        // The routing unit hands over the last DWC-agreed value and state.
        sub.gfb_primary.state = dead.checkpoint;
        sub.gfb_shadow.state = dead.checkpoint;
        sub.checkpoint = dead.checkpoint;
        sub.output = dead.output;
        sub.output_valid = dead.output_valid;
        sub.hrus = {};
        sub.dwc_mismatch_count = 0;
        sub.busy = false;
        sub.grid_origin = tick_ + config_.heal_settle;
        sub.scheduled = true;
        heal_pending_[sub.addr] = dead.addr;
        break;
      }
    }
  }
  for (const auto& f : outcome.stale) trace_.add(t, RowKind::EVENT, "stale_flag", to_string(f));
  for (const auto& f : outcome.exhausted) {
    if (auto role = fabric_.routing.role_of(f)) fabric_.routing.disable(*role);
    trace_.add(t, RowKind::EVENT, "capacity_exhausted", to_string(f));
  }
}

void Simulator::step() {
  const std::int64_t t = now_ns();

  for (const auto& name : raised_pulses_) trace_.add(t, RowKind::SIGNAL, name, "0");
  raised_pulses_.clear();

  // 1
  apply_stimulus(t);

  // 2
  while (next_fault_ < schedule_.faults.size() && schedule_.faults[next_fault_].time_ns <= t) {
    inject(schedule_.faults[next_fault_], t);
    ++next_fault_;
  }

  // 3
  struct Latched {
    std::array<Word, kHrusPerCell> value{};
    std::array<bool, kHrusPerCell> valid{};
  };
  std::map<int, Latched> hru_out;
  for (auto& c : fabric_.cells()) {
    if (!live(c)) continue;
    Latched l;
    for (int i = 0; i < kHrusPerCell; ++i) {
      auto [incoming, valid] = fabric_.read(c.code().input_select[i]);
      ReplicaUpsets upsets{};
      if (auto it = pending_upsets_.find({c.addr.ordinal(), i}); it != pending_upsets_.end()) {
        upsets = it->second;
      }
      auto r = hru_step(c.hrus[i], incoming, upsets);
      l.value[i] = r.output;
      l.valid[i] = valid;
      const std::string where = to_string(c.addr) + ".hru" + std::to_string(i);
      if (r.unmaskable) {
        trace_.add(t, RowKind::EVENT, "unmaskable_transient", where);
        for (auto& rec : injections_) {
          if (rec.time_ns == t && rec.kind == FaultKind::TRANSIENT_REG && rec.cell == c.addr &&
              rec.target.starts_with(where + ".")) {
            rec.unmaskable = true;
          }
        }
      } else if (r.transient) {
        trace_.add(t, RowKind::EVENT, "hru_masked", where);
      }
    }
    hru_out[c.addr.ordinal()] = l;
  }
  pending_upsets_.clear();

  // 4, 5
  std::vector<CellAddr> flags;
  for (auto& c : fabric_.cells()) {
    if (!live(c)) continue;
    const std::string name = block_name(c.addr);
    auto r = cell_fire(c, tick_, config_.gains, config_.dwc_threshold);
    if (r.done) {
      if (config_.probe_blocks) pulse(name + ".done", t);
      if (r.mismatch) {
        trace_.add(t, RowKind::EVENT, "dwc_mismatch", to_string(c.addr));
      } else if (config_.probe_blocks && c.output_valid) {
        auto s = std::to_string(c.output);
        auto& last = last_signal_[name + ".out"];
        if (last != s) {
          trace_.add(t, RowKind::SIGNAL, name + ".out", s);
          last = s;
        }
      }
      if (r.permanent_error) flags.push_back(c.addr);
      if (auto it = heal_pending_.find(c.addr); it != heal_pending_.end()) {
        trace_.add(t, RowKind::EVENT, "heal_complete",
                   to_string(it->second) + "->" + to_string(c.addr));
        heal_pending_.erase(it);
      }
    }
    if (!c.busy && tick_ >= c.grid_origin && (tick_ - c.grid_origin) % config_.scan_period == 0) {
      const auto& l = hru_out.at(c.addr.ordinal());
      begin_firing(c, tick_, l.value, l.valid);
      if (config_.probe_blocks) {
        for (int i = 0; i < kHrusPerCell; ++i) pulse(name + ".lat" + std::to_string(i), t);
      }
    }
  }

  // 6, 7
  auto outcome = monitor_failures(healing_, flags, fabric_.routing, t);
  apply_actions(outcome, t);

  // 8
  for (const auto& out : netlist_.outputs) {
    auto [v, valid] = fabric_.read(CellOutput{mapping_.block_cell[out.block]});
    if (!valid) continue;
    auto s = std::to_string(v);
    auto& last = last_signal_[out.name];
    if (last != s) {
      trace_.add(t, RowKind::SIGNAL, out.name, s);
      last = s;
    }
  }

  ++tick_;
}

Trace Simulator::run(std::int64_t until_ns) {
  if (until_ns % kNsPerHalfTick != 0 || until_ns < 0) {
    throw Error(ErrorKind::Config, "until_ns must be a non-negative multiple of 5");
  }
  while (now_ns() <= until_ns) step();
  trace_.metadata()["end_ns"] = std::to_string(until_ns);
  Trace out = trace_;
  out.finalize();
  return out;
}

std::optional<Word> Simulator::output(std::string_view name) const {
  for (const auto& out : netlist_.outputs) {
    if (out.name != name) continue;
    auto [v, valid] = fabric_.read(CellOutput{mapping_.block_cell[out.block]});
    if (valid) return v;
    return std::nullopt;
  }
  throw Error(ErrorKind::Config, "unknown output '" + std::string(name) + "'");
}

Trace golden_run(const Netlist& netlist, const Mapping& mapping, const Stimulus& stimulus,
                 std::int64_t until_ns, const SimConfig& config) {
  Simulator sim(netlist, mapping, stimulus, FaultSchedule{}, config);
  return sim.run(until_ns);
}

}  // namespace selfheal
