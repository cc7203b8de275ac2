#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfheal/trace.hpp"

namespace selfheal {

// Finite-trace temporal properties over SIGNAL values sampled every half-tick.
//
//   prop    := impl
//   impl    := or ( ('->' | '=>') impl )?
//   or      := and ( ('|' | '||') and )*
//   and     := unary ( ('&' | '&&') unary )*
//   unary   := '!' unary | 'G' '(' prop ')' | 'F' '[' H ']' '(' prop ')'
//            | 'rising' '(' sig ')' | '(' prop ')' | operand ( cmp operand )?
//   operand := sig | integer | 'golden' '(' sig ')'
//   cmp     := '==' | '!=' | '>=' | '<=' | '>' | '<'
//
// H counts half-ticks. A bare operand is true when nonzero. A signal is absent
// before its first row; two absent operands are equal, and any ordering
// comparison involving an absent operand is false.
struct PropNode;
using PropPtr = std::shared_ptr<const PropNode>;

struct TemporalProperty {
  PropPtr root;
  std::string text;
};

TemporalProperty parse_property(std::string_view text);

enum class VerdictKind { HOLDS, VIOLATED, INCONCLUSIVE };
std::string_view to_string(VerdictKind kind);

struct Verdict {
  VerdictKind kind = VerdictKind::HOLDS;
  std::optional<std::int64_t> counterexample_ns;  // set when VIOLATED
};

// `golden` is required when the property uses golden(sig).
Verdict check_property(const Trace& trace, const TemporalProperty& prop,
                       const Trace* golden = nullptr);

}  // namespace selfheal
