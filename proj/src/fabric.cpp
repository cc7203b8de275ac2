#include "selfheal/fabric.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "selfheal/error.hpp"

namespace selfheal {

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && out >= 0;
}

char side_char(Side s) { return s == Side::LEFT ? 'L' : 'R'; }

// "B0" / "T3" / "S2.u1" after the "L." or "R." prefix.
std::optional<CellAddr> parse_local(Side side, std::string_view rest, int layer) {
  if (rest.size() < 2) return std::nullopt;
  CellAddr a;
  a.side = side;
  a.layer = layer;
  int n = 0;
  if (rest[0] == 'B' || rest[0] == 'T') {
    if (!parse_int(rest.substr(1), n) || n >= kCellsPerSide) return std::nullopt;
    a.kind = rest[0] == 'B' ? CellKind::B : CellKind::T;
    a.index = n;
    return a;
  }
  if (rest[0] == 'S') {
    auto dot = rest.find(".u");
    int unit = 0;
    if (dot == std::string_view::npos || !parse_int(rest.substr(1, dot - 1), n) ||
        !parse_int(rest.substr(dot + 2), unit) || n > 3 || unit > 1) {
      return std::nullopt;
    }
    if ((n % 2 == 0) != (side == Side::LEFT)) return std::nullopt;
    a.kind = CellKind::STEM_UNIT;
    a.index = (n / 2) * 2 + unit;
    return a;
  }
  return std::nullopt;
}

}  // namespace

int CellAddr::ordinal() const {
  const int kind_base = static_cast<int>(kind) * 2 * kCellsPerSide;
  return layer * kCellsPerLayer + kind_base + static_cast<int>(side) * kCellsPerSide + index;
}

CellAddr CellAddr::from_ordinal(int ordinal) {
  CellAddr a;
  a.layer = ordinal / kCellsPerLayer;
  int rem = ordinal % kCellsPerLayer;
  a.kind = static_cast<CellKind>(rem / (2 * kCellsPerSide));
  rem %= 2 * kCellsPerSide;
  a.side = static_cast<Side>(rem / kCellsPerSide);
  a.index = rem % kCellsPerSide;
  return a;
}

std::string to_string(const CellAddr& a) {
  std::string s;
  if (a.layer > 0) s += std::to_string(a.layer) + "/";
  s += side_char(a.side);
  s += '.';
  switch (a.kind) {
    case CellKind::B: s += "B" + std::to_string(a.index); break;
    case CellKind::T: s += "T" + std::to_string(a.index); break;
    case CellKind::STEM_UNIT:
      s += "S" + std::to_string(a.stem_cell()) + ".u" + std::to_string(a.stem_unit());
      break;
  }
  return s;
}

std::optional<CellAddr> parse_cell_addr(std::string_view text) {
  int layer = 0;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    if (!parse_int(text.substr(0, slash), layer)) return std::nullopt;
    text = text.substr(slash + 1);
  }
  if (text.size() >= 3 && (text[0] == 'L' || text[0] == 'R') && text[1] == '.') {
    return parse_local(text[0] == 'L' ? Side::LEFT : Side::RIGHT, text.substr(2), layer);
  }
  // Figure-style aliases: F<i>, R<i>, S<i>.u<j>.
  if (text.size() < 2) return std::nullopt;
  if (text[0] == 'F' || text[0] == 'R') {
    int n = 0;
    if (!parse_int(text.substr(1), n) || n >= 2 * kCellsPerSide) return std::nullopt;
    CellAddr a;
    a.kind = text[0] == 'F' ? CellKind::B : CellKind::T;
    a.side = n % 2 == 0 ? Side::LEFT : Side::RIGHT;
    a.index = n / 2;
    a.layer = layer;
    return a;
  }
  if (text[0] == 'S') {
    int n = 0;
    auto dot = text.find('.');
    if (dot == std::string_view::npos || !parse_int(text.substr(1, dot - 1), n)) return std::nullopt;
    return parse_local(n % 2 == 0 ? Side::LEFT : Side::RIGHT, text, layer);
  }
  return std::nullopt;
}

GeneticCode& GeneticCode::normalize() {
  for (int i = arity(op); i < kHrusPerCell; ++i) input_select[i] = Unused{};
  return *this;
}

std::string describe(const GeneticCode& code) {
  std::ostringstream os;
  os << to_string(code.op) << '(';
  for (int i = 0; i < arity(code.op); ++i) {
    if (i) os << ' ';
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Unused>) os << '-';
          else if constexpr (std::is_same_v<T, ExternalPort>) os << "in" << s.id;
          else if constexpr (std::is_same_v<T, CellOutput>) os << to_string(s.role);
          else os << '#' << s.value;
        },
        code.input_select[i]);
  }
  os << ')';
  return os.str();
}

HruResult hru_step(HruState& hru, Word incoming, const ReplicaUpsets& upsets) {
  for (int i = 0; i < 3; ++i) hru.replicas[i] = incoming ^ upsets[i];

  const auto& r = hru.replicas;
  std::optional<Word> majority;
  if (r[0] == r[1] || r[0] == r[2]) majority = r[0];
  else if (r[1] == r[2]) majority = r[1];

  HruResult out;
  if (!majority) {
    hru.detector_flags = {true, true, true};
    out.output = r[hru.active_replica];
    out.unmaskable = true;
    hru.comparator_out = out.output;
    return out;
  }
  for (int i = 0; i < 3; ++i) hru.detector_flags[i] = r[i] != *majority;
  out.transient = std::any_of(hru.detector_flags.begin(), hru.detector_flags.end(),
                              [](bool f) { return f; });
  if (hru.detector_flags[hru.active_replica]) {
    for (int i = 0; i < 3; ++i) {
      if (!hru.detector_flags[i]) {
        hru.active_replica = i;
        break;
      }
    }
  }
  hru.comparator_out = *majority;
  out.output = *majority;
  return out;
}

std::string_view to_string(CellMode mode) {
  switch (mode) {
    case CellMode::ACTIVE: return "ACTIVE";
    case CellMode::PASSIVE: return "PASSIVE";
    case CellMode::DEAD: return "DEAD";
    case CellMode::HEALING: return "HEALING";
  }
  return "?";
}

void transition(CellMode& mode, CellMode to) {
  const bool legal = (mode == CellMode::ACTIVE && to == CellMode::DEAD) ||
                     (mode == CellMode::PASSIVE && to == CellMode::HEALING) ||
                     (mode == CellMode::HEALING && to == CellMode::DEAD);
  if (!legal) {
    throw Error(ErrorKind::Structural, "illegal mode transition " +
                                           std::string(to_string(mode)) + " -> " +
                                           std::string(to_string(to)));
  }
  mode = to;
}

void begin_firing(FunctionCell& cell, std::int64_t now,
                  const std::array<Word, kHrusPerCell>& inputs,
                  const std::array<bool, kHrusPerCell>& valid) {
  if (cell.mode != CellMode::ACTIVE && cell.mode != CellMode::HEALING) {
    throw Error(ErrorKind::Structural, "cannot fire " + to_string(cell.addr) + " in mode " +
                                           std::string(to_string(cell.mode)));
  }
  const Opcode op = cell.code().op;
  cell.busy = true;
  cell.fire_start = now;
  cell.latched = inputs;
  if (op == Opcode::MUX2) {
    cell.latched_valid = valid[2] && valid[inputs[2] ? 1 : 0];
  } else if (op == Opcode::DELAY1) {
    // The register holds a defined value from reset.
    cell.latched_valid = true;
  } else {
    cell.latched_valid = std::all_of(valid.begin(), valid.begin() + arity(op),
                                     [](bool v) { return v; });
  }
}

FireResult cell_fire(FunctionCell& cell, std::int64_t now, const PiGains& gains, int threshold) {
  if (cell.mode != CellMode::ACTIVE && cell.mode != CellMode::HEALING) {
    throw Error(ErrorKind::Structural, "cannot fire " + to_string(cell.addr) + " in mode " +
                                           std::string(to_string(cell.mode)));
  }
  FireResult res;
  if (!cell.busy || now != cell.fire_start + kCellLatency) return res;
  res.done = true;
  cell.busy = false;

  const Opcode op = cell.code().op;
  std::span<const Word> in(cell.latched.data(), static_cast<size_t>(arity(op)));
  auto p = eval_block(op, in, cell.gfb_primary.state, gains);
  auto s = eval_block(op, in, cell.gfb_shadow.state, gains);
  cell.gfb_primary.state = p.state;
  cell.gfb_shadow.state = s.state;
  const Word out_p = cell.gfb_primary.stuck.apply(p.output);
  const Word out_s = cell.gfb_shadow.stuck.apply(s.output);

  if (out_p == out_s) {
    cell.dwc_mismatch_count = 0;
    cell.output = out_p;
    cell.output_valid = cell.latched_valid;
    cell.checkpoint = p.state;
  } else {
    ++cell.dwc_mismatch_count;
    res.mismatch = true;
    res.permanent_error = cell.dwc_mismatch_count >= threshold;
  }
  res.output = cell.output;
  return res;
}

void RoutingState::assign(const CellAddr& role, const CellAddr& holder) { holders_[role] = holder; }

std::optional<CellAddr> RoutingState::holder(const CellAddr& role) const {
  auto it = holders_.find(role);
  return it == holders_.end() ? std::nullopt : it->second;
}

std::optional<CellAddr> RoutingState::role_of(const CellAddr& cell) const {
  for (const auto& [role, h] : holders_) {
    if (h && *h == cell) return role;
  }
  return std::nullopt;
}

void RoutingState::disable(const CellAddr& role) { holders_[role] = std::nullopt; }

void RoutingState::reroute(const CellAddr& dead, const CellAddr& substitute) {
  if (role_of(substitute)) {
    throw Error(ErrorKind::SpareExhausted, "spare " + to_string(substitute) + " already in use");
  }
  for (auto& [role, h] : holders_) {
    if (h && *h == dead) h = substitute;
  }
}

Fabric::Fabric(int layers) : layers_(layers) {
  if (layers < 1) throw Error(ErrorKind::Config, "fabric needs at least one layer");
  cells_.resize(static_cast<size_t>(layers) * kCellsPerLayer);
  for (int i = 0; i < static_cast<int>(cells_.size()); ++i) {
    auto& c = cells_[i];
    c.addr = CellAddr::from_ordinal(i);
    c.mode = c.addr.kind == CellKind::B ? CellMode::ACTIVE : CellMode::PASSIVE;
    c.config_memory.resize(c.addr.kind == CellKind::T ? kCellsPerSide : 1);
  }
}

bool Fabric::contains(const CellAddr& a) const {
  return a.layer >= 0 && a.layer < layers_ && a.index >= 0 && a.index < kCellsPerSide;
}

FunctionCell& Fabric::cell(const CellAddr& a) {
  if (!contains(a)) throw Error(ErrorKind::Config, "unknown cell address " + to_string(a));
  return cells_[a.ordinal()];
}

const FunctionCell& Fabric::cell(const CellAddr& a) const {
  if (!contains(a)) throw Error(ErrorKind::Config, "unknown cell address " + to_string(a));
  return cells_[a.ordinal()];
}

std::pair<Word, bool> Fabric::read(const Source& src) const {
  return std::visit(
      [&](const auto& s) -> std::pair<Word, bool> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Unused>) {
          return {0, true};
        } else if constexpr (std::is_same_v<T, ExternalPort>) {
          return {ports.at(s.id), port_valid.at(s.id)};
        } else if constexpr (std::is_same_v<T, CellOutput>) {
          auto h = routing.holder(s.role);
          if (!h) return {kDisabledValue, true};
          const auto& c = cell(*h);
          return {c.output, c.output_valid};
        } else {
          return {s.value, true};
        }
      },
      src);
}

std::string Fabric::dump() const {
  std::ostringstream os;
  for (const auto& c : cells_) {
    os << to_string(c.addr) << ' ' << to_string(c.mode) << ' ';
    const auto& code = c.config_memory.at(c.active_slot);
    auto role = routing.role_of(c.addr);
    os << (role ? describe(code) : std::string("-")) << " mismatch=" << c.dwc_mismatch_count
       << '\n';
  }
  return os.str();
}

void load_code(Fabric& fabric, const CellAddr& addr, const GeneticCode& code, int slot) {
  auto& c = fabric.cell(addr);
  if (slot < 0 || slot >= static_cast<int>(c.config_memory.size())) {
    throw Error(ErrorKind::Config,
                "slot " + std::to_string(slot) + " out of range for " + to_string(addr));
  }
  GeneticCode normalized = code;
  c.config_memory[slot] = normalized.normalize();
}

void reroute(Fabric& fabric, const CellAddr& dead, const CellAddr& substitute) {
  if (fabric.cell(dead).mode != CellMode::DEAD) {
    throw Error(ErrorKind::Structural, "reroute from live cell " + to_string(dead));
  }
  const auto& sub = fabric.cell(substitute);
  if (sub.mode != CellMode::PASSIVE || fabric.routing.role_of(substitute)) {
    throw Error(ErrorKind::SpareExhausted, "spare " + to_string(substitute) + " not available");
  }
  fabric.routing.reroute(dead, substitute);
}

}  // namespace selfheal
