#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace selfheal {

// 16-bit data word; booleans are 0/1. Arithmetic wraps modulo 2^16.
using Word = std::uint16_t;

enum class Opcode : std::uint8_t { NOT, AND, OR, ADD, SUB, MUL, CMP_GE, MUX2, DELAY1, PI };

// Number of operands consumed (MUX2 counts its select line).
int arity(Opcode op);
bool is_boolean(Opcode op);
bool is_stateful(Opcode op);
std::string_view to_string(Opcode op);
std::optional<Opcode> parse_opcode(std::string_view text);

struct BlockState {
  Word delay_reg = 0;
  std::int32_t pi_accum = 0;

  friend bool operator==(const BlockState&, const BlockState&) = default;
};

// Rational gains kp = kp_num/kp_den, ki = ki_num/ki_den.
struct PiGains {
  std::int64_t kp_num = 1;
  std::int64_t kp_den = 1;
  std::int64_t ki_num = 0;
  std::int64_t ki_den = 1;

  friend bool operator==(const PiGains&, const PiGains&) = default;
};

struct BlockResult {
  Word output;
  BlockState state;
};

// Evaluates one firing of a generic function block. Operand order for MUX2 is
// (a, b, select): select == 0 yields a, otherwise b.
BlockResult eval_block(Opcode op, std::span<const Word> inputs,
                       const BlockState& state, const PiGains& gains);

}  // namespace selfheal
