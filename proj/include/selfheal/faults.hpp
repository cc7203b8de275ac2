#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfheal/fabric.hpp"

namespace selfheal {

enum class FaultKind : std::uint8_t { TRANSIENT_REG, PERMANENT_GFB, CCF };
std::string_view to_string(FaultKind kind);

// One injection point. `block` is set when the schedule names a logical block
// ("@target.gfb0"); it resolves to whichever cell holds that block at
// injection time.
struct FaultTarget {
  std::optional<CellAddr> cell;
  std::optional<std::string> block;
  bool is_hru = false;
  int hru = 0;
  int replica = 0;
  int gfb_copy = 0;  // 0 primary, 1 shadow
};

std::string to_string(const FaultTarget& target);

struct Fault {
  int id = 0;
  std::int64_t time_ns = 0;
  FaultKind kind = FaultKind::TRANSIENT_REG;
  std::vector<FaultTarget> targets;  // exactly one unless CCF
  Word mask = 0;
  bool stuck_value = false;  // permanent faults: stuck-at-1 when true

  std::string payload() const;
};

struct FaultSchedule {
  std::vector<Fault> faults;  // sorted by time, ids unique
};

// Lines: `time_ns,kind,target,payload`, '#' comments.
//   180,transient,L.B0.hru1.rep2,flip:0x0004
//   235,permanent,F0.gfb0,stuck0:0x0001
//   400,ccf,L.B0.gfb0+L.B0.gfb1,stuck1:0x0001
// `max_layers` > 0 additionally rejects addresses beyond the fabric.
FaultSchedule parse_schedule(std::string_view text, int max_layers = 0);

}  // namespace selfheal
