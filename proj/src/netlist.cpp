#include "selfheal/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <optional>
#include <sstream>

#include "selfheal/error.hpp"

namespace selfheal {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

struct RawBlock {
  BlockDecl decl;
  std::vector<std::string> operands;
};

}  // namespace

int Netlist::levels() const {
  int m = 0;
  for (const auto& b : blocks) m = std::max(m, b.level);
  return m;
}

int Netlist::input_index(std::string_view name) const {
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Netlist::block_index(std::string_view name) const {
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

Netlist parse_netlist(std::string_view text) {
  Netlist net;
  std::vector<RawBlock> raw;
  std::vector<std::pair<std::string, std::pair<std::string, int>>> raw_outputs;
  int level = 1;
  int lineno = 0;
  std::istringstream in{std::string(text)};
  std::string line_buf;
  auto taken = [&](std::string_view name) {
    return net.input_index(name) >= 0 ||
           std::any_of(raw.begin(), raw.end(), [&](const RawBlock& b) { return b.decl.name == name; });
  };

  while (std::getline(in, line_buf)) {
    ++lineno;
    std::string_view line = line_buf;
    // '#' followed by a digit is a literal; any other '#' starts a comment.
    for (size_t pos = line.find('#'); pos != std::string_view::npos; pos = line.find('#', pos + 1)) {
      if (pos + 1 >= line.size() || !std::isdigit(static_cast<unsigned char>(line[pos + 1]))) {
        line = line.substr(0, pos);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.starts_with("level ")) {
      auto body = trim(line.substr(6));
      if (body.empty() || body.back() != ':') throw ParseError(lineno, "expected 'level <k>:'");
      body = trim(body.substr(0, body.size() - 1));
      int k = 0;
      auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), k);
      if (ec != std::errc() || p != body.data() + body.size() || k < 1) {
        throw ParseError(lineno, "bad level number");
      }
      level = k;
    } else if (line.starts_with("in ")) {
      auto body = trim(line.substr(3));
      auto colon = body.find(':');
      if (colon == std::string_view::npos) throw ParseError(lineno, "expected 'in <name>:<bool|word>'");
      auto name = trim(body.substr(0, colon));
      auto type = trim(body.substr(colon + 1));
      if (!is_ident(name)) throw ParseError(lineno, "bad input name");
      if (type != "bool" && type != "word") throw ParseError(lineno, "unknown type '" + std::string(type) + "'");
      if (taken(name)) throw ParseError(lineno, "duplicate name '" + std::string(name) + "'");
      net.inputs.push_back({std::string(name), type == "bool"});
    } else if (line.starts_with("blk ")) {
      auto body = trim(line.substr(4));
      auto eq = body.find('=');
      auto open = body.find('(');
      if (eq == std::string_view::npos || open == std::string_view::npos || open < eq ||
          body.back() != ')') {
        throw ParseError(lineno, "expected 'blk <name> = OP(args)'");
      }
      auto name = trim(body.substr(0, eq));
      auto opname = trim(body.substr(eq + 1, open - eq - 1));
      if (!is_ident(name)) throw ParseError(lineno, "bad block name");
      if (taken(name)) throw ParseError(lineno, "duplicate name '" + std::string(name) + "'");
      auto op = parse_opcode(opname);
      if (!op) throw ParseError(lineno, "unknown opcode '" + std::string(opname) + "'");
      auto args = split(body.substr(open + 1, body.size() - open - 2), ',');
      if (args.size() == 1 && args[0].empty()) args.clear();
      if (static_cast<int>(args.size()) != arity(*op)) {
        throw ParseError(lineno, std::string(opname) + " takes " + std::to_string(arity(*op)) +
                                     " operands, got " + std::to_string(args.size()));
      }
      RawBlock rb;
      rb.decl.name = name;
      rb.decl.op = *op;
      rb.decl.level = level;
      rb.decl.line = lineno;
      for (auto a : args) rb.operands.emplace_back(a);
      raw.push_back(std::move(rb));
    } else if (line.starts_with("out ")) {
      auto body = trim(line.substr(4));
      auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ParseError(lineno, "expected 'out <name> = <block>'");
      raw_outputs.push_back({std::string(trim(body.substr(0, eq))),
                             {std::string(trim(body.substr(eq + 1))), lineno}});
    } else {
      throw ParseError(lineno, "unknown statement");
    }
  }

  for (auto& rb : raw) net.blocks.push_back(rb.decl);

  // Resolve operands now that all names are known.
  for (size_t i = 0; i < raw.size(); ++i) {
    for (const auto& a : raw[i].operands) {
      const int line = raw[i].decl.line;
      if (a.starts_with('#')) {
        unsigned v = 0;
        auto [p, ec] = std::from_chars(a.data() + 1, a.data() + a.size(), v);
        if (ec != std::errc() || p != a.data() + a.size() || v > 0xFFFF) {
          throw ParseError(line, "bad literal '" + a + "'");
        }
        net.blocks[i].inputs.push_back(Literal{static_cast<Word>(v)});
      } else if (int k = net.input_index(a); k >= 0) {
        net.blocks[i].inputs.push_back(InputRef{k});
      } else if (int b = net.block_index(a); b >= 0) {
        net.blocks[i].inputs.push_back(BlockRef{b});
      } else {
        throw ParseError(line, "unresolved reference '" + a + "'");
      }
    }
  }

  for (const auto& [name, ref] : raw_outputs) {
    int b = net.block_index(ref.first);
    if (b < 0) throw ParseError(ref.second, "output '" + name + "' references unknown block '" + ref.first + "'");
    net.outputs.push_back({name, b});
  }

  // Combinational cycles: DELAY1 outputs break dependency chains.
  const size_t n = net.blocks.size();
  std::vector<int> color(n, 0);
  std::function<void(int)> visit = [&](int v) {
    color[v] = 1;
    for (const auto& op : net.blocks[v].inputs) {
      if (auto* br = std::get_if<BlockRef>(&op)) {
        if (net.blocks[br->index].op == Opcode::DELAY1) continue;
        if (color[br->index] == 1) {
          throw ParseError(net.blocks[v].line,
                           "combinational cycle through '" + net.blocks[v].name + "'");
        }
        if (color[br->index] == 0) visit(br->index);
      }
    }
    color[v] = 2;
  };
  for (size_t v = 0; v < n; ++v) {
    if (color[v] == 0) visit(static_cast<int>(v));
  }

  // Boolean typing: fixpoint because DELAY1 copies the type of its input.
  std::vector<bool> is_bool(n, false);
  auto operand_bool = [&](const Operand& o) {
    if (auto* in = std::get_if<InputRef>(&o)) return net.inputs[in->index].is_bool;
    if (auto* br = std::get_if<BlockRef>(&o)) return static_cast<bool>(is_bool[br->index]);
    return std::get<Literal>(o).value <= 1;
  };
  for (size_t iter = 0; iter <= n; ++iter) {
    bool changed = false;
    for (size_t v = 0; v < n; ++v) {
      const auto& b = net.blocks[v];
      bool t = false;
      switch (b.op) {
        case Opcode::NOT: case Opcode::AND: case Opcode::OR: case Opcode::CMP_GE:
          t = true;
          break;
        case Opcode::MUX2:
          t = operand_bool(b.inputs[0]) && operand_bool(b.inputs[1]);
          break;
        case Opcode::DELAY1:
          t = operand_bool(b.inputs[0]);
          break;
        default:
          break;
      }
      if (t != is_bool[v]) {
        is_bool[v] = t;
        changed = true;
      }
    }
    if (!changed) break;
  }
  for (const auto& b : net.blocks) {
    auto check = [&](const Operand& o) {
      if (!operand_bool(o)) {
        throw ParseError(b.line, "word operand feeds boolean input of '" + b.name + "'");
      }
    };
    if (is_boolean(b.op)) {
      for (const auto& o : b.inputs) check(o);
    } else if (b.op == Opcode::MUX2) {
      check(b.inputs[2]);
    }
  }
  return net;
}

Mapping place(const Netlist& net, int layers) {
  if (net.levels() > layers) {
    throw Error(ErrorKind::Config, "netlist uses " + std::to_string(net.levels()) +
                                       " levels but only " + std::to_string(layers) +
                                       " layers are available");
  }
  Mapping m;
  m.layers = layers;
  m.block_cell.resize(net.blocks.size());
  std::vector<int> used(static_cast<size_t>(layers), 0);
  for (size_t i = 0; i < net.blocks.size(); ++i) {
    const int layer = net.blocks[i].level - 1;
    const int k = used[layer]++;
    if (k >= 2 * kCellsPerSide) {
      throw Error(ErrorKind::Config, "level " + std::to_string(layer + 1) + " has more than " +
                                         std::to_string(2 * kCellsPerSide) + " blocks");
    }
    m.block_cell[i] = CellAddr{CellKind::B, k % 2 == 0 ? Side::LEFT : Side::RIGHT, k / 2, layer};
  }
  for (size_t i = 0; i < net.blocks.size(); ++i) {
    const auto& b = net.blocks[i];
    GeneticCode code;
    code.op = b.op;
    for (size_t j = 0; j < b.inputs.size(); ++j) {
      code.input_select[j] = std::visit(
          [&](const auto& o) -> Source {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, InputRef>) return ExternalPort{o.index};
            else if constexpr (std::is_same_v<T, BlockRef>) return CellOutput{m.block_cell[o.index]};
            else return Constant{o.value};
          },
          b.inputs[j]);
    }
    code.normalize();
    const CellAddr addr = m.block_cell[i];
    m.b_codes[addr] = code;
    for (int t = 0; t < kCellsPerSide; ++t) {
      m.t_codes[{CellAddr{CellKind::T, addr.side, t, addr.layer}, addr.index}] = code;
    }
  }
  return m;
}

std::string Mapping::to_text(const Netlist& net) const {
  std::ostringstream os;
  os << "# layers=" << layers << '\n';
  for (size_t i = 0; i < block_cell.size(); ++i) {
    os << "B," << net.blocks[i].name << ',' << to_string(block_cell[i]) << ','
       << describe(b_codes.at(block_cell[i])) << '\n';
  }
  for (const auto& [key, code] : t_codes) {
    os << "T," << to_string(key.first) << ",slot" << key.second << ',' << describe(code) << '\n';
  }
  return os.str();
}

Fabric build_fabric(const Netlist& net, const Mapping& m) {
  Fabric f(m.layers);
  f.ports.assign(net.inputs.size(), 0);
  f.port_valid.assign(net.inputs.size(), false);
  for (const auto& [addr, code] : m.b_codes) {
    load_code(f, addr, code);
    f.routing.assign(addr, addr);
  }
  for (const auto& [key, code] : m.t_codes) load_code(f, key.first, code, key.second);
  return f;
}

Word ccs_semantics(CcsCondition c, Word actual, Word target) {
  switch (c) {
    case CcsCondition::SET: return actual;
    case CcsCondition::DECREMENT: return static_cast<Word>(target - 1);
    case CcsCondition::INCREMENT: return static_cast<Word>(target + 1);
    case CcsCondition::CANCEL: return 0;
  }
  return target;
}

}  // namespace selfheal
