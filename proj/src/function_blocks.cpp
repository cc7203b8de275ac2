#include "selfheal/function_blocks.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <string>

#include "selfheal/error.hpp"

namespace selfheal {

namespace {

constexpr std::array<std::string_view, 10> kNames = {
    "NOT", "AND", "OR", "ADD", "SUB", "MUL", "CMP_GE", "MUX2", "DELAY1", "PI"};

std::int32_t saturating_add(std::int32_t acc, std::int64_t delta) {
  const std::int64_t sum = static_cast<std::int64_t>(acc) + delta;
  return static_cast<std::int32_t>(
      std::clamp<std::int64_t>(sum, std::numeric_limits<std::int32_t>::min(),
                               std::numeric_limits<std::int32_t>::max()));
}

Word clamp_to_word(std::int64_t v) {
  return static_cast<Word>(std::clamp<std::int64_t>(v, 0, 0xFFFF));
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Config: return "config";
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::SpareExhausted: return "spare-exhausted";
    case ErrorKind::CapacityExhausted: return "capacity-exhausted";
    case ErrorKind::Property: return "property";
  }
  return "unknown";
}

int arity(Opcode op) {
  switch (op) {
    case Opcode::NOT:
    case Opcode::DELAY1:
    case Opcode::PI:
      return 1;
    case Opcode::MUX2:
      return 3;
    default:
      return 2;
  }
}

bool is_boolean(Opcode op) {
  return op == Opcode::NOT || op == Opcode::AND || op == Opcode::OR;
}

bool is_stateful(Opcode op) { return op == Opcode::DELAY1 || op == Opcode::PI; }

std::string_view to_string(Opcode op) { return kNames[static_cast<size_t>(op)]; }

std::optional<Opcode> parse_opcode(std::string_view text) {
  for (size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == text) return static_cast<Opcode>(i);
  }
  return std::nullopt;
}

BlockResult eval_block(Opcode op, std::span<const Word> in,
                       const BlockState& state, const PiGains& gains) {
  if (static_cast<int>(in.size()) != arity(op)) {
    throw Error(ErrorKind::Structural,
                std::string(to_string(op)) + ": expected " +
                    std::to_string(arity(op)) + " operands, got " +
                    std::to_string(in.size()));
  }
  BlockResult r{0, state};
  switch (op) {
    case Opcode::NOT: r.output = in[0] ? 0 : 1; break;
    case Opcode::AND: r.output = (in[0] && in[1]) ? 1 : 0; break;
    case Opcode::OR: r.output = (in[0] || in[1]) ? 1 : 0; break;
    case Opcode::ADD: r.output = static_cast<Word>(in[0] + in[1]); break;
    case Opcode::SUB: r.output = static_cast<Word>(in[0] - in[1]); break;
    case Opcode::MUL: r.output = static_cast<Word>(static_cast<std::uint32_t>(in[0]) * in[1]); break;
    case Opcode::CMP_GE: r.output = in[0] >= in[1] ? 1 : 0; break;
    case Opcode::MUX2: r.output = in[2] ? in[1] : in[0]; break;
    case Opcode::DELAY1:
      r.output = state.delay_reg;
      r.state.delay_reg = in[0];
      break;
    case Opcode::PI: {
      r.state.pi_accum = saturating_add(state.pi_accum, in[0]);
      // Common denominator keeps the sum exact before the single floor.
      const std::int64_t num = gains.kp_num * gains.ki_den * in[0] +
                               gains.ki_num * gains.kp_den * r.state.pi_accum;
      const std::int64_t den = gains.kp_den * gains.ki_den;
      std::int64_t q = num / den;
      if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
      r.output = clamp_to_word(q);
      break;
    }
  }
  return r;
}

}  // namespace selfheal
