#include <gtest/gtest.h>

#include <map>
#include <set>

#include "selfheal/error.hpp"
#include "selfheal/healing.hpp"

using namespace selfheal;

namespace {

CellAddr addr(const char* s) { return *parse_cell_addr(s); }

RoutingState identity(int layers = 1) {
  RoutingState r;
  for (int l = 0; l < layers; ++l) {
    for (Side s : {Side::LEFT, Side::RIGHT}) {
      for (int i = 0; i < kCellsPerSide; ++i) {
        CellAddr b{CellKind::B, s, i, l};
        r.assign(b, b);
      }
    }
  }
  return r;
}

std::vector<std::string> render(const std::vector<HealingAction>& acts) {
  std::vector<std::string> out;
  for (const auto& a : acts) out.push_back(std::string(to_string(a.kind)) + " " + heal_fields(a));
  return out;
}

}  // namespace

TEST(Monitor, BCellHealedByTCell) {
  HealingLayerState st;
  auto routing = identity();
  const CellAddr flags[] = {addr("F0")};
  auto out = monitor_failures(st, flags, routing, 345);
  EXPECT_EQ(render(out.actions), (std::vector<std::string>{"DEACTIVATE L.B0,-,-",
                                                           "REROUTE L.B0,L.T0,-",
                                                           "RESTORE L.T0,-,0"}));
  for (const auto& a : out.actions) EXPECT_EQ(a.time_ns, 345);
  EXPECT_EQ(st.action_log.size(), 3u);
}

TEST(Monitor, NoFlagsNoActions) {
  HealingLayerState st;
  auto before = st.free_t;
  auto out = monitor_failures(st, {}, identity(), 0);
  EXPECT_TRUE(out.actions.empty());
  EXPECT_EQ(st.free_t, before);
  EXPECT_TRUE(st.action_log.empty());
}

TEST(Monitor, RepeatedFlagIsStale) {
  HealingLayerState st;
  auto routing = identity();
  const CellAddr flags[] = {addr("F0")};
  monitor_failures(st, flags, routing, 0);
  auto again = monitor_failures(st, flags, routing, 5);
  EXPECT_TRUE(again.actions.empty());
  EXPECT_EQ(again.stale, std::vector<CellAddr>{addr("F0")});
}

TEST(Monitor, TwoFlagsInAddressOrder) {
  HealingLayerState st;
  auto routing = identity();
  const CellAddr flags[] = {addr("F2"), addr("F0")};  // L.B1, L.B0
  auto out = monitor_failures(st, flags, routing, 0);
  ASSERT_EQ(out.actions.size(), 6u);
  EXPECT_EQ(render(out.actions)[1], "REROUTE L.B0,L.T0,-");
  EXPECT_EQ(render(out.actions)[4], "REROUTE L.B1,L.T1,-");
}

TEST(Monitor, EveryTwoFlagSubsetGetsUniqueSpares) {
  // All pairs of B cells x every availability pattern of the T tier.
  std::vector<CellAddr> bs;
  for (Side s : {Side::LEFT, Side::RIGHT}) {
    for (int i = 0; i < kCellsPerSide; ++i) bs.push_back(CellAddr{CellKind::B, s, i, 0});
  }
  for (size_t i = 0; i < bs.size(); ++i) {
    for (size_t j = i + 1; j < bs.size(); ++j) {
      for (int avail = 0; avail < 256; ++avail) {
        HealingLayerState st;
        for (int k = 0; k < 8; ++k) {
          if (!(avail >> k & 1)) st.free_t[0][k / 4].erase(k % 4);
        }
        const auto free_before = st.free_t[0];
        const CellAddr flags[] = {bs[i], bs[j]};
        auto out = monitor_failures(st, flags, identity(), 0);
        std::set<CellAddr> spares;
        std::map<CellAddr, CellAddr> healed_by;
        for (const auto& a : out.actions) {
          if (a.kind == HealKind::REROUTE) {
            ASSERT_TRUE(spares.insert(*a.object).second);
            healed_by[a.subject] = *a.object;
          }
        }
        ASSERT_EQ(healed_by.size(), 2u);  // stem units always back up the T tier
        for (const auto& f : flags) {
          const auto& sub = healed_by.at(f);
          ASSERT_EQ(sub.side, f.side);
          const bool t_free = !free_before[static_cast<int>(f.side)].empty();
          if (sub.kind == CellKind::STEM_UNIT) {
            // Only when the pair exhausted the same-side T tier.
            ASSERT_TRUE(!t_free || (bs[i].side == bs[j].side &&
                                    free_before[static_cast<int>(f.side)].size() < 2));
          }
        }
      }
    }
  }
}

TEST(Monitor, TRoleFailureDifferentiatesStemUnit) {
  HealingLayerState st;
  auto routing = identity();
  const CellAddr f0[] = {addr("F0")};
  monitor_failures(st, f0, routing, 0);
  routing.reroute(addr("F0"), addr("R0"));
  const CellAddr r0[] = {addr("R0")};
  auto out = monitor_failures(st, r0, routing, 100);
  EXPECT_EQ(render(out.actions),
            (std::vector<std::string>{"DEACTIVATE L.T0,-,-", "REROUTE L.T0,L.S0.u0,-",
                                      "DIFFERENTIATE L.S0.u0,L.T0,0", "RESTORE L.S0.u0,-,0"}));
  EXPECT_EQ(st.last_syndrome->value, 0);
}

TEST(Monitor, ExhaustionLeavesOnlyDeactivate) {
  HealingLayerState st;
  st.free_t[0][0].clear();
  for (int s : {0, 1, 4, 5}) st.available_syndromes[0].erase(s);
  const CellAddr flags[] = {addr("F0")};
  auto out = monitor_failures(st, flags, identity(), 0);
  EXPECT_EQ(render(out.actions), std::vector<std::string>{"DEACTIVATE L.B0,-,-"});
  EXPECT_EQ(out.exhausted, std::vector<CellAddr>{addr("F0")});
}

TEST(Syndromes, FormPicksLowestSameSideUnit) {
  HealingLayerState st;
  EXPECT_EQ(form_syndrome(st, addr("R0")).value, 0);
  EXPECT_EQ(form_syndrome(st, addr("R1")).value, 2);  // R.T0 -> right sublayer
  st.available_syndromes[0].erase(0);
  EXPECT_EQ(form_syndrome(st, addr("R0")).value, 1);
  st.available_syndromes[0].erase(1);
  EXPECT_EQ(form_syndrome(st, addr("R0")).value, 4);
  for (int s : {4, 5}) st.available_syndromes[0].erase(s);
  try {
    form_syndrome(st, addr("R0"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CapacityExhausted);
  }
}

TEST(Syndromes, SwitchIsABijection) {
  std::set<int> available = {0, 1, 2, 3, 4, 5, 6, 7};
  std::set<std::pair<int, int>> seen;
  std::set<CellAddr> units;
  for (int s = 0; s < 8; ++s) {
    auto cmd = switch_syndrome(available, Syndrome{s, 0}, 1);
    EXPECT_EQ(cmd.stem_cell, s / 2);
    EXPECT_EQ(cmd.unit.stem_unit(), s % 2);
    EXPECT_EQ(cmd.unit.stem_cell(), s / 2);
    EXPECT_EQ(cmd.unit.side, (s / 2) % 2 == 0 ? Side::LEFT : Side::RIGHT);
    EXPECT_EQ(syndrome_for(cmd.unit).value, s);
    EXPECT_TRUE(seen.insert({cmd.stem_cell, cmd.unit.stem_unit()}).second);
    EXPECT_TRUE(units.insert(cmd.unit).second);
  }
  EXPECT_TRUE(available.empty());
}

TEST(Syndromes, ThreeSelectsStemCellOneUnitOne) {
  std::set<int> available = {3};
  auto cmd = switch_syndrome(available, Syndrome{3, 0}, 2);
  EXPECT_EQ(to_string(cmd.unit), "R.S1.u1");
  EXPECT_EQ(cmd.stem_cell, 1);
  EXPECT_EQ(cmd.code_slot, 2);
}

TEST(Syndromes, SwitchRejectsReuseAndEmpty) {
  std::set<int> available = {5};
  switch_syndrome(available, Syndrome{5, 0}, 0);
  EXPECT_THROW(switch_syndrome(available, Syndrome{5, 0}, 0), Error);
  std::set<int> none;
  try {
    switch_syndrome(none, Syndrome{0, 0}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Structural);
  }
}

TEST(Stem, DifferentiateLoadsRoleCode) {
  Fabric f(1);
  GeneticCode c;
  c.op = Opcode::OR;
  c.input_select = {ExternalPort{0}, ExternalPort{1}, Unused{}, Unused{}};
  load_code(f, addr("R0"), c, 1);
  std::set<int> available = {0, 1, 2, 3, 4, 5, 6, 7};
  auto cmd = switch_syndrome(available, Syndrome{0, 0}, 1);
  differentiate_stem(f, cmd);
  const auto& u = f.cell(addr("L.S0.u0"));
  EXPECT_EQ(u.mode, CellMode::HEALING);
  EXPECT_EQ(u.code(), c.normalize());
  EXPECT_THROW(differentiate_stem(f, cmd), Error);  // already differentiated
}

TEST(Stem, DifferentiateRejectsNonStemTarget) {
  Fabric f(1);
  DifferentiationCommand cmd;
  cmd.unit = addr("R0");
  EXPECT_THROW(differentiate_stem(f, cmd), Error);
}

TEST(Stem, WrongSideNeverFormed) {
  HealingLayerState st;
  // A right-side failure never draws from the left sublayer, even when the
  // right one is empty.
  for (int s : {2, 3, 6, 7}) st.available_syndromes[0].erase(s);
  EXPECT_THROW(form_syndrome(st, addr("R1")), Error);
}

TEST(Actions, Rendering) {
  HealingAction a{HealKind::RESTORE, addr("R0"), std::nullopt, 2, 10};
  EXPECT_EQ(heal_fields(a), "L.T0,-,2");
  EXPECT_EQ(to_string(HealKind::DIFFERENTIATE), "DIFFERENTIATE");
}
