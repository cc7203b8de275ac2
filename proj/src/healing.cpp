#include "selfheal/healing.hpp"

#include <algorithm>

#include "selfheal/error.hpp"

namespace selfheal {

std::string_view to_string(HealKind kind) {
  switch (kind) {
    case HealKind::DEACTIVATE: return "DEACTIVATE";
    case HealKind::REROUTE: return "REROUTE";
    case HealKind::RESTORE: return "RESTORE";
    case HealKind::DIFFERENTIATE: return "DIFFERENTIATE";
  }
  return "?";
}

std::string heal_fields(const HealingAction& a) {
  std::string s = to_string(a.subject) + ",";
  s += a.object ? to_string(*a.object) : "-";
  s += ",";
  s += a.code_slot ? std::to_string(*a.code_slot) : "-";
  return s;
}

CellAddr Syndrome::unit_addr() const {
  CellAddr a;
  a.kind = CellKind::STEM_UNIT;
  a.side = side();
  a.index = (stem_cell() / 2) * 2 + unit();
  a.layer = layer;
  return a;
}

Syndrome syndrome_for(const CellAddr& u) {
  return Syndrome{u.stem_cell() * 2 + u.stem_unit(), u.layer};
}

HealingLayerState::HealingLayerState(int layers)
    : free_t(static_cast<size_t>(layers)), available_syndromes(static_cast<size_t>(layers)) {
  for (auto& sides : free_t) {
    for (auto& s : sides) {
      for (int i = 0; i < kCellsPerSide; ++i) s.insert(i);
    }
  }
  for (auto& s : available_syndromes) {
    for (int i = 0; i < 8; ++i) s.insert(i);
  }
}

Syndrome form_syndrome(const HealingLayerState& state, const CellAddr& failed) {
  const auto& avail = state.available_syndromes.at(failed.layer);
  for (int v : avail) {
    Syndrome s{v, failed.layer};
    if (s.side() == failed.side) return s;
  }
  throw Error(ErrorKind::CapacityExhausted,
              "no stem unit left for " + to_string(failed));
}

DifferentiationCommand switch_syndrome(std::set<int>& available, const Syndrome& selector,
                                       int code_slot) {
  if (!available.erase(selector.value)) {
    throw Error(ErrorKind::Structural,
                "syndrome " + std::to_string(selector.value) + " not available");
  }
  DifferentiationCommand cmd;
  cmd.unit = selector.unit_addr();
  cmd.stem_cell = selector.stem_cell();
  cmd.code_slot = code_slot;
  cmd.syndrome = selector;
  return cmd;
}

void differentiate_stem(Fabric& fabric, const DifferentiationCommand& cmd) {
  if (cmd.unit.kind != CellKind::STEM_UNIT || cmd.unit.side != cmd.syndrome.side()) {
    throw Error(ErrorKind::Structural, "bad differentiation target " + to_string(cmd.unit));
  }
  auto& unit = fabric.cell(cmd.unit);
  if (unit.mode != CellMode::PASSIVE) {
    throw Error(ErrorKind::Structural, to_string(cmd.unit) + " already differentiated");
  }
  CellAddr t{CellKind::T, cmd.unit.side, 0, cmd.unit.layer};
  load_code(fabric, cmd.unit, fabric.cell(t).config_memory.at(cmd.code_slot));
  transition(unit.mode, CellMode::HEALING);
  unit.active_slot = 0;
}

MonitorOutcome monitor_failures(HealingLayerState& state, std::span<const CellAddr> flags,
                                const RoutingState& routing, std::int64_t time_ns) {
  MonitorOutcome out;
  std::vector<CellAddr> sorted(flags.begin(), flags.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  for (const auto& f : sorted) {
    if (!state.error_latch.insert(f).second) {
      out.stale.push_back(f);
      continue;
    }
    auto role = routing.role_of(f);
    if (!role) {
      out.stale.push_back(f);
      continue;
    }
    const int slot = role->index;
    auto emit = [&](HealKind k, CellAddr subj, std::optional<CellAddr> obj,
                    std::optional<int> s) {
      HealingAction a{k, subj, obj, s, time_ns};
      out.actions.push_back(a);
      state.action_log.push_back(a);
    };

    auto& free_t = state.free_t.at(f.layer)[static_cast<int>(f.side)];
    if (f.kind == CellKind::B && !free_t.empty()) {
      CellAddr t{CellKind::T, f.side, *free_t.begin(), f.layer};
      free_t.erase(free_t.begin());
      emit(HealKind::DEACTIVATE, f, std::nullopt, std::nullopt);
      emit(HealKind::REROUTE, f, t, std::nullopt);
      emit(HealKind::RESTORE, t, std::nullopt, slot);
      continue;
    }

    std::optional<Syndrome> syn;
    try {
      syn = form_syndrome(state, f);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::CapacityExhausted) throw;
    }
    emit(HealKind::DEACTIVATE, f, std::nullopt, std::nullopt);
    if (!syn) {
      out.exhausted.push_back(f);
      continue;
    }
    state.last_syndrome = *syn;
    auto cmd = switch_syndrome(state.available_syndromes.at(f.layer), *syn, slot);
    emit(HealKind::REROUTE, f, cmd.unit, std::nullopt);
    emit(HealKind::DIFFERENTIATE, cmd.unit, f, syn->value);
    emit(HealKind::RESTORE, cmd.unit, std::nullopt, slot);
  }
  return out;
}

}  // namespace selfheal
