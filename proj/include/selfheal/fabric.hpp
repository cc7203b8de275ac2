#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "selfheal/function_blocks.hpp"

namespace selfheal {

enum class CellKind : std::uint8_t { B, T, STEM_UNIT };
enum class Side : std::uint8_t { LEFT, RIGHT };

inline constexpr int kCellsPerSide = 4;
inline constexpr int kCellsPerLayer = 24;  // 8 B + 8 T + 8 stem execution units
inline constexpr int kHrusPerCell = 4;     // North, West, East, South

// Physical location of a B cell, T cell or stem execution unit.
//
// Stem units are numbered per side: index 0,1 are units 0,1 of stem cell S0
// (LEFT) or S1 (RIGHT); index 2,3 are units of S2 or S3.
struct CellAddr {
  CellKind kind = CellKind::B;
  Side side = Side::LEFT;
  int index = 0;
  int layer = 0;

  auto operator<=>(const CellAddr&) const = default;

  // Dense index into a fabric's cell vector.
  int ordinal() const;
  static CellAddr from_ordinal(int ordinal);

  // Global stem cell number (S0..S3) and unit (0,1) of a stem address.
  int stem_cell() const { return (index / 2) * 2 + (side == Side::RIGHT ? 1 : 0); }
  int stem_unit() const { return index % 2; }
};

// Canonical text: "L.B0", "R.T3", "L.S2.u1", with a "<layer>/" prefix when
// layer > 0. Aliases accepted by parse: "F<i>", "R<i>", "S<i>.u<j>" where even
// numbers are LEFT and odd numbers RIGHT.
std::string to_string(const CellAddr& addr);
std::optional<CellAddr> parse_cell_addr(std::string_view text);

// Where a GFB operand comes from. Cell sources name the role (original B-cell
// address); routing resolves it to whichever physical cell currently holds it.
struct Unused {
  bool operator==(const Unused&) const = default;
};
struct ExternalPort {
  int id;
  bool operator==(const ExternalPort&) const = default;
};
struct CellOutput {
  CellAddr role;
  bool operator==(const CellOutput&) const = default;
};
struct Constant {
  Word value;
  bool operator==(const Constant&) const = default;
};
using Source = std::variant<Unused, ExternalPort, CellOutput, Constant>;

struct GeneticCode {
  Opcode op = Opcode::NOT;
  std::array<Source, kHrusPerCell> input_select{};
  bool output_enable = true;

  // Clears selectors beyond the opcode arity so equal codes compare equal.
  GeneticCode& normalize();
  bool operator==(const GeneticCode&) const = default;
};

struct HruState {
  std::array<Word, 3> replicas{};
  std::array<bool, 3> detector_flags{};
  int active_replica = 0;
  Word comparator_out = 0;
};

struct HruResult {
  Word output = 0;
  bool transient = false;
  bool unmaskable = false;
};

// One half-tick of a hybrid redundancy unit. upsets[i] is XORed into replica i
// after the write.
using ReplicaUpsets = std::array<Word, 3>;
HruResult hru_step(HruState& hru, Word incoming, const ReplicaUpsets& upsets = {});

enum class CellMode : std::uint8_t { ACTIVE, PASSIVE, DEAD, HEALING };
std::string_view to_string(CellMode mode);

// Checks the legal mode transitions; throws a structural error otherwise.
void transition(CellMode& mode, CellMode to);

struct StuckMask {
  Word force0 = 0;
  Word force1 = 0;

  Word apply(Word w) const { return static_cast<Word>((w & ~force0) | force1); }
  bool empty() const { return force0 == 0 && force1 == 0; }
  bool operator==(const StuckMask&) const = default;
};

struct GfbCopy {
  BlockState state;
  StuckMask stuck;
};

// Half-ticks from firing start to done (3.5 clock cycles).
inline constexpr int kCellLatency = 7;

struct FunctionCell {
  CellAddr addr;
  CellMode mode = CellMode::PASSIVE;
  std::array<HruState, kHrusPerCell> hrus{};
  GfbCopy gfb_primary;
  GfbCopy gfb_shadow;
  int dwc_mismatch_count = 0;
  std::vector<GeneticCode> config_memory;
  int active_slot = 0;

  // Firing bookkeeping.
  bool busy = false;
  std::int64_t fire_start = 0;
  std::array<Word, kHrusPerCell> latched{};
  bool latched_valid = false;
  std::int64_t grid_origin = 0;  // half-tick of the first firing
  bool scheduled = false;

  // Last DWC-agreed output and state.
  Word output = 0;
  bool output_valid = false;
  BlockState checkpoint;

  const GeneticCode& code() const { return config_memory.at(active_slot); }
};

// Latches HRU outputs into the cell and starts a firing at `now`.
void begin_firing(FunctionCell& cell, std::int64_t now,
                  const std::array<Word, kHrusPerCell>& inputs,
                  const std::array<bool, kHrusPerCell>& valid);

struct FireResult {
  Word output = 0;
  bool done = false;
  bool permanent_error = false;
  bool mismatch = false;
};

// Completes the firing begun at `cell.fire_start` when `now` is the done edge.
// Both GFB copies evaluate the active code on the latched inputs; on agreement
// the output is latched, on disagreement it is held and the mismatch counter
// advances. `permanent_error` rises once the counter reaches `threshold`.
FireResult cell_fire(FunctionCell& cell, std::int64_t now, const PiGains& gains, int threshold);

// Role -> current physical holder. A role without holder reads the disabled
// value.
class RoutingState {
 public:
  void assign(const CellAddr& role, const CellAddr& holder);
  std::optional<CellAddr> holder(const CellAddr& role) const;
  std::optional<CellAddr> role_of(const CellAddr& cell) const;
  void disable(const CellAddr& role);
  // Every consumer that read `dead` now reads `substitute`. Throws
  // SpareExhausted when `substitute` already holds a role.
  void reroute(const CellAddr& dead, const CellAddr& substitute);
  const std::map<CellAddr, std::optional<CellAddr>>& table() const { return holders_; }

 private:
  std::map<CellAddr, std::optional<CellAddr>> holders_;
};

inline constexpr Word kDisabledValue = 0;

struct Fabric {
  explicit Fabric(int layers = 1);

  int layers() const { return layers_; }
  FunctionCell& cell(const CellAddr& addr);
  const FunctionCell& cell(const CellAddr& addr) const;
  bool contains(const CellAddr& addr) const;
  std::vector<FunctionCell>& cells() { return cells_; }
  const std::vector<FunctionCell>& cells() const { return cells_; }

  // Value and validity of a source, resolved through routing.
  std::pair<Word, bool> read(const Source& src) const;

  RoutingState routing;
  std::vector<Word> ports;
  std::vector<bool> port_valid;

  // Line-oriented snapshot: addr, mode, active code, mismatch counter.
  std::string dump() const;

 private:
  int layers_;
  std::vector<FunctionCell> cells_;
};

// Writes a genetic code. For T cells `slot` selects the memory slot (the same
// side B-cell index); B cells and stem units hold a single code.
void load_code(Fabric& fabric, const CellAddr& addr, const GeneticCode& code, int slot = 0);

// Moves every consumer of `dead` to `substitute`.
void reroute(Fabric& fabric, const CellAddr& dead, const CellAddr& substitute);

std::string describe(const GeneticCode& code);

}  // namespace selfheal
