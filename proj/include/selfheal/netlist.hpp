#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "selfheal/fabric.hpp"

namespace selfheal {

struct InputRef {
  int index;
  bool operator==(const InputRef&) const = default;
};
struct BlockRef {
  int index;
  bool operator==(const BlockRef&) const = default;
};
struct Literal {
  Word value;
  bool operator==(const Literal&) const = default;
};
using Operand = std::variant<InputRef, BlockRef, Literal>;

struct PortDecl {
  std::string name;
  bool is_bool = false;
};

struct BlockDecl {
  std::string name;
  Opcode op = Opcode::NOT;
  std::vector<Operand> inputs;
  int level = 1;
  int line = 0;
};

struct OutputDecl {
  std::string name;
  int block = 0;
};

// Function-block graph read from a .fbd file.
//
//   # comment
//   in  set:bool
//   in  actual:word
//   level 1:
//   blk target = MUX2(cand, actual, set)
//   out Target = target
//
// Operands name inputs or blocks (forward references allowed) or are literals
// written `#<decimal>`. Feedback loops must pass through a DELAY1 block.
struct Netlist {
  std::vector<PortDecl> inputs;
  std::vector<BlockDecl> blocks;
  std::vector<OutputDecl> outputs;

  int levels() const;
  int input_index(std::string_view name) const;  // -1 if absent
  int block_index(std::string_view name) const;  // -1 if absent
};

// Throws ParseError naming the first offending line.
Netlist parse_netlist(std::string_view text);

struct Mapping {
  int layers = 1;
  std::vector<CellAddr> block_cell;  // indexed like Netlist::blocks
  std::map<CellAddr, GeneticCode> b_codes;
  // (T cell, slot) -> code.
  std::map<std::pair<CellAddr, int>, GeneticCode> t_codes;

  std::string to_text(const Netlist& netlist) const;
};

// Level k goes to layer k-1; within a level blocks alternate LEFT/RIGHT in
// declaration order. Every same-side T cell receives each B code in the slot
// equal to the B-cell index.
Mapping place(const Netlist& netlist, int layers);

// Fresh fabric with the mapping's codes loaded and identity routing.
Fabric build_fabric(const Netlist& netlist, const Mapping& mapping);

enum class CcsCondition { SET, DECREMENT, INCREMENT, CANCEL };

// Reference target-speed update of the cruise controller.
Word ccs_semantics(CcsCondition condition, Word actual, Word target);

}  // namespace selfheal
