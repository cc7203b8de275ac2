#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "selfheal/fabric.hpp"

namespace selfheal {

enum class HealKind : std::uint8_t { DEACTIVATE, REROUTE, RESTORE, DIFFERENTIATE };
std::string_view to_string(HealKind kind);

struct HealingAction {
  HealKind kind;
  CellAddr subject;
  std::optional<CellAddr> object;
  std::optional<int> code_slot;
  std::int64_t time_ns = 0;

  bool operator==(const HealingAction&) const = default;
};

// Trace payload after the kind: "<subject>,<object>,<slot>" with '-' for
// absent fields.
std::string heal_fields(const HealingAction& action);

// 3-bit health syndrome. Syndrome s differentiates unit s%2 of stem cell s/2;
// even stem cells (S0, S2) sit in the left healing sublayer.
struct Syndrome {
  int value = 0;
  int layer = 0;

  int stem_cell() const { return value / 2; }
  int unit() const { return value % 2; }
  Side side() const { return stem_cell() % 2 == 0 ? Side::LEFT : Side::RIGHT; }
  CellAddr unit_addr() const;
  bool operator==(const Syndrome&) const = default;
};

Syndrome syndrome_for(const CellAddr& stem_unit);

struct DifferentiationCommand {
  CellAddr unit;
  int stem_cell = 0;
  int code_slot = 0;
  Syndrome syndrome;
};

struct HealingLayerState {
  explicit HealingLayerState(int layers = 1);

  std::set<CellAddr> error_latch;
  // Free T cells per (layer, side), and undifferentiated syndromes per layer.
  std::vector<std::array<std::set<int>, 2>> free_t;
  std::vector<std::set<int>> available_syndromes;
  std::optional<Syndrome> last_syndrome;
  std::vector<HealingAction> action_log;
};

struct MonitorOutcome {
  std::vector<HealingAction> actions;
  std::vector<CellAddr> stale;      // flags from already-latched cells
  std::vector<CellAddr> exhausted;  // failures left unhealed
};

// Latches permanent-error flags and emits the heal sequence for each new one,
// in ascending address order. B cells go to the lowest free same-side T cell;
// T-role holders (and B cells once the T tier is used up) go to a stem unit.
MonitorOutcome monitor_failures(HealingLayerState& state, std::span<const CellAddr> flags,
                                const RoutingState& routing, std::int64_t time_ns);

// Lowest undifferentiated stem unit on the failed cell's side.
// Throws CapacityExhausted when none is left.
Syndrome form_syndrome(const HealingLayerState& state, const CellAddr& failed);

// Consumes `selector` from `available`.
DifferentiationCommand switch_syndrome(std::set<int>& available, const Syndrome& selector,
                                       int code_slot);

// Brings the stem unit named by `cmd` into HEALING mode with the genetic code
// of the role it assumes (taken from the same-side T-cell memory).
void differentiate_stem(Fabric& fabric, const DifferentiationCommand& cmd);

}  // namespace selfheal
