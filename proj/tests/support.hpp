#pragma once
// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "selfheal/faults.hpp"
#include "selfheal/function_blocks.hpp"
#include "selfheal/netlist.hpp"
#include "selfheal/scenario.hpp"
#include "selfheal/sim.hpp"

namespace selfheal::testing {

inline std::filesystem::path asset(const std::string& rel) {
  return std::filesystem::path(SELFHEAL_ASSET_DIR) / rel;
}

inline LoadedScenario scenario(const std::string& id) {
  return prepare(asset("scenarios/" + id + ".json"));
}

inline Trace run(const LoadedScenario& s, std::int64_t until = -1) {
  Simulator sim(s.netlist, s.mapping, s.stimulus, s.schedule, sim_config(s));
  return sim.run(until < 0 ? s.config.until_ns : until);
}

inline Fault permanent(int id, std::int64_t t, const std::string& block, int copy = 0,
                       Word mask = 1, bool stuck1 = false) {
  Fault f;
  f.id = id;
  f.time_ns = t;
  f.kind = FaultKind::PERMANENT_GFB;
  FaultTarget tg;
  tg.block = block;
  tg.gfb_copy = copy;
  f.targets = {tg};
  f.mask = mask;
  f.stuck_value = stuck1;
  return f;
}

inline Fault transient(int id, std::int64_t t, const CellAddr& cell, int hru, int replica,
                       Word mask) {
  Fault f;
  f.id = id;
  f.time_ns = t;
  f.kind = FaultKind::TRANSIENT_REG;
  FaultTarget tg;
  tg.cell = cell;
  tg.is_hru = true;
  tg.hru = hru;
  tg.replica = replica;
  f.targets = {tg};
  f.mask = mask;
  return f;
}

// 1..3 single-replica upsets on cells the netlist uses, at distinct times.
inline FaultSchedule random_transients(std::mt19937_64& rng, const Mapping& m,
                                       std::int64_t until_ns) {
  FaultSchedule s;
  std::uniform_int_distribution<int> count(1, 3), hru(0, 3), rep(0, 2), bit(0, 15);
  std::uniform_int_distribution<size_t> cell(0, m.block_cell.size() - 1);
  std::uniform_int_distribution<std::int64_t> tick(0, until_ns / 5);
  std::vector<std::int64_t> times;
  const int n = count(rng);
  while (static_cast<int>(times.size()) < n) {
    auto t = tick(rng) * 5;
    if (std::find(times.begin(), times.end(), t) == times.end()) times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  for (int i = 0; i < n; ++i) {
    s.faults.push_back(transient(i, times[i], m.block_cell[cell(rng)], hru(rng), rep(rng),
                                 static_cast<Word>(1u << bit(rng))));
  }
  return s;
}

// Evaluates a DELAY1-free netlist straight from its declarations.
inline std::map<std::string, Word> evaluate_direct(const Netlist& net,
                                                   const std::vector<Word>& inputs) {
  std::vector<std::optional<Word>> memo(net.blocks.size());
  std::function<Word(int)> block = [&](int b) -> Word {
    if (memo[b]) return *memo[b];
    std::vector<Word> args;
    for (const auto& op : net.blocks[b].inputs) {
      if (auto* in = std::get_if<InputRef>(&op)) args.push_back(inputs.at(in->index));
      else if (auto* br = std::get_if<BlockRef>(&op)) args.push_back(block(br->index));
      else args.push_back(std::get<Literal>(op).value);
    }
    memo[b] = eval_block(net.blocks[b].op, args, BlockState{}, PiGains{}).output;
    return *memo[b];
  };
  std::map<std::string, Word> out;
  for (const auto& o : net.outputs) out[o.name] = block(o.block);
  return out;
}

}  // namespace selfheal::testing
