#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "selfheal/error.hpp"
#include "selfheal/fabric.hpp"

using namespace selfheal;

namespace {

CellAddr addr(const char* s) { return *parse_cell_addr(s); }

GeneticCode code(Opcode op, std::initializer_list<Source> in) {
  GeneticCode c;
  c.op = op;
  std::copy(in.begin(), in.end(), c.input_select.begin());
  return c.normalize();
}

// Fires a cell once on fixed inputs and returns the result at the done edge.
FireResult fire(FunctionCell& c, std::int64_t start, std::array<Word, 4> in, int threshold = 2) {
  begin_firing(c, start, in, {true, true, true, true});
  for (std::int64_t t = start; t < start + kCellLatency; ++t) {
    EXPECT_FALSE(cell_fire(c, t, {}, threshold).done);
  }
  return cell_fire(c, start + kCellLatency, {}, threshold);
}

}  // namespace

TEST(Addressing, CanonicalAndAliases) {
  EXPECT_EQ(to_string(addr("F0")), "L.B0");
  EXPECT_EQ(to_string(addr("F3")), "R.B1");
  EXPECT_EQ(to_string(addr("R0")), "L.T0");
  EXPECT_EQ(to_string(addr("S1.u1")), "R.S1.u1");
  EXPECT_EQ(to_string(addr("1/R.T3")), "1/R.T3");
  EXPECT_FALSE(parse_cell_addr("X.B0"));
  EXPECT_FALSE(parse_cell_addr("L.B4"));
  EXPECT_FALSE(parse_cell_addr(""));
}

TEST(Addressing, OrdinalRoundTrip) {
  for (int i = 0; i < 3 * kCellsPerLayer; ++i) {
    const auto a = CellAddr::from_ordinal(i);
    EXPECT_EQ(a.ordinal(), i);
    EXPECT_EQ(parse_cell_addr(to_string(a)), a);
  }
}

TEST(Hru, UnanimousReplicas) {
  HruState h;
  auto r = hru_step(h, 5);
  EXPECT_EQ(r.output, 5);
  EXPECT_FALSE(r.transient);
  EXPECT_EQ(h.replicas, (std::array<Word, 3>{5, 5, 5}));
}

TEST(Hru, SingleUpsetMaskedAndSwitchRotates) {
  HruState h;
  h.active_replica = 1;
  auto r = hru_step(h, 5, {0, 5 ^ 9, 0});  // replicas (5, 9, 5)
  EXPECT_EQ(h.replicas, (std::array<Word, 3>{5, 9, 5}));
  EXPECT_EQ(r.output, 5);
  EXPECT_TRUE(r.transient);
  EXPECT_FALSE(r.unmaskable);
  EXPECT_EQ(h.active_replica, 0);
}

TEST(Hru, EverySingleCorruptionIsMasked) {
  // Oracle: 2-of-3 vote written out by counting agreement.
  std::mt19937 rng(140);
  std::uniform_int_distribution<int> w(0, 65535), m(1, 65535);
  for (int trial = 0; trial < 500; ++trial) {
    const Word v = static_cast<Word>(w(rng));
    for (int rep = 0; rep < 3; ++rep) {
      for (int active = 0; active < 3; ++active) {
        HruState h;
        h.active_replica = active;
        const Word mask = static_cast<Word>(m(rng));
        ReplicaUpsets u{};
        u[rep] = mask;
        auto r = hru_step(h, v, u);
        std::array<Word, 3> reps{v, v, v};
        reps[rep] ^= mask;
        Word vote = reps[0];
        for (Word cand : reps) {
          if (std::count(reps.begin(), reps.end(), cand) >= 2) vote = cand;
        }
        ASSERT_EQ(r.output, vote);
        ASSERT_EQ(r.output, v);
        ASSERT_TRUE(r.transient);
        ASSERT_NE(h.active_replica, rep);
        // The next clean write clears the upset.
        auto clean = hru_step(h, v);
        ASSERT_FALSE(clean.transient);
      }
    }
  }
}

TEST(Hru, TripleDisagreementIsUnmaskable) {
  HruState h;
  h.active_replica = 2;
  auto r = hru_step(h, 1, {0, 3, 2});  // replicas (1, 2, 3)
  EXPECT_TRUE(r.unmaskable);
  EXPECT_EQ(r.output, 3);  // the active replica passes through
}

TEST(Hru, MatchingDoubleUpsetOutvotesTheCleanReplica) {
  HruState h;
  auto r = hru_step(h, 4, {1, 1, 0});
  EXPECT_FALSE(r.unmaskable);
  EXPECT_TRUE(r.transient);
  EXPECT_EQ(r.output, 5);
}

TEST(Hru, RepeatedUpsetsNeverPoisonState) {
  HruState h;
  for (int i = 0; i < 1000; ++i) {
    ReplicaUpsets u{};
    u[i % 3] = static_cast<Word>(i + 1);
    ASSERT_EQ(hru_step(h, static_cast<Word>(i), u).output, static_cast<Word>(i));
  }
}

TEST(Dwc, FaultFreeCellFiresAfterLatency) {
  FunctionCell c;
  c.mode = CellMode::ACTIVE;
  c.config_memory = {code(Opcode::AND, {ExternalPort{0}, ExternalPort{1}})};
  auto r = fire(c, 0, {1, 1, 0, 0});
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.output, 1);
  EXPECT_FALSE(r.permanent_error);
  EXPECT_EQ(kCellLatency * 5, 35);
}

TEST(Dwc, StuckAtZeroFlagsAfterThreshold) {
  FunctionCell c;
  c.mode = CellMode::ACTIVE;
  c.config_memory = {code(Opcode::OR, {ExternalPort{0}, ExternalPort{1}})};
  c.gfb_primary.stuck.force0 = 1;
  auto r1 = fire(c, 0, {1, 0, 0, 0});
  EXPECT_TRUE(r1.mismatch);
  EXPECT_FALSE(r1.permanent_error);
  auto r2 = fire(c, 8, {1, 0, 0, 0});
  EXPECT_TRUE(r2.permanent_error);
  EXPECT_FALSE(c.output_valid);  // never agreed
}

TEST(Dwc, FlagRisesIffMaskChangesOutput) {
  // Every 2-input boolean opcode x input pair x single stuck-at on either copy.
  for (Opcode op : {Opcode::AND, Opcode::OR}) {
    for (Word a : {0, 1}) {
      for (Word b : {0, 1}) {
        const Word good = op == Opcode::AND ? (a & b) : (a | b);
        for (int copy = 0; copy < 2; ++copy) {
          for (bool stuck1 : {false, true}) {
            FunctionCell c;
            c.mode = CellMode::ACTIVE;
            c.config_memory = {code(op, {ExternalPort{0}, ExternalPort{1}})};
            auto& m = (copy == 0 ? c.gfb_primary : c.gfb_shadow).stuck;
            (stuck1 ? m.force1 : m.force0) = 1;
            const bool changes = m.apply(good) != good;
            fire(c, 0, {a, b, 0, 0});
            auto r = fire(c, 8, {a, b, 0, 0});
            EXPECT_EQ(r.permanent_error, changes);
          }
        }
      }
    }
  }
}

TEST(Dwc, CommonCauseFaultEscapes) {
  FunctionCell c;
  c.mode = CellMode::ACTIVE;
  c.config_memory = {code(Opcode::OR, {ExternalPort{0}, ExternalPort{1}})};
  c.gfb_primary.stuck.force0 = 1;
  c.gfb_shadow.stuck.force0 = 1;
  fire(c, 0, {1, 0, 0, 0});
  auto r = fire(c, 8, {1, 0, 0, 0});
  EXPECT_FALSE(r.mismatch);
  EXPECT_FALSE(r.permanent_error);
  EXPECT_EQ(r.output, 0);  // wrong, but agreed
}

TEST(Dwc, MismatchCountResetsOnAgreement) {
  FunctionCell c;
  c.mode = CellMode::ACTIVE;
  c.config_memory = {code(Opcode::OR, {ExternalPort{0}, ExternalPort{1}})};
  c.gfb_primary.stuck.force0 = 1;
  fire(c, 0, {1, 0, 0, 0});
  fire(c, 8, {0, 0, 0, 0});  // output 0 either way
  EXPECT_EQ(c.dwc_mismatch_count, 0);
  EXPECT_FALSE(fire(c, 16, {1, 0, 0, 0}).permanent_error);
}

TEST(Cells, FiringDeadCellIsStructural) {
  FunctionCell c;
  c.mode = CellMode::DEAD;
  c.config_memory = {code(Opcode::NOT, {ExternalPort{0}})};
  EXPECT_THROW(begin_firing(c, 0, {}, {}), Error);
  c.mode = CellMode::PASSIVE;
  EXPECT_THROW(cell_fire(c, 0, {}, 2), Error);
}

TEST(Cells, ModeMachine) {
  CellMode m = CellMode::ACTIVE;
  transition(m, CellMode::DEAD);
  EXPECT_EQ(m, CellMode::DEAD);
  m = CellMode::PASSIVE;
  transition(m, CellMode::HEALING);
  transition(m, CellMode::DEAD);
  for (auto [from, to] : std::vector<std::pair<CellMode, CellMode>>{
           {CellMode::DEAD, CellMode::ACTIVE},
           {CellMode::DEAD, CellMode::HEALING},
           {CellMode::PASSIVE, CellMode::ACTIVE},
           {CellMode::ACTIVE, CellMode::HEALING},
           {CellMode::HEALING, CellMode::PASSIVE}}) {
    CellMode x = from;
    EXPECT_THROW(transition(x, to), Error);
    EXPECT_EQ(x, from);
  }
}

TEST(Fabric, InitialModes) {
  Fabric f(2);
  EXPECT_EQ(f.cells().size(), 48u);
  EXPECT_EQ(f.cell(addr("F0")).mode, CellMode::ACTIVE);
  EXPECT_EQ(f.cell(addr("R0")).mode, CellMode::PASSIVE);
  EXPECT_EQ(f.cell(addr("1/L.S0.u1")).mode, CellMode::PASSIVE);
  EXPECT_EQ(f.cell(addr("R1")).config_memory.size(), 4u);
  EXPECT_THROW(Fabric(0), Error);
}

TEST(Fabric, LoadCodeReadBack) {
  Fabric f(1);
  auto c = code(Opcode::AND, {ExternalPort{0}, ExternalPort{1}});
  load_code(f, addr("L.B0"), c);
  EXPECT_EQ(f.cell(addr("L.B0")).code(), c);
  std::vector<GeneticCode> codes;
  for (int i = 0; i < 4; ++i) {
    codes.push_back(code(Opcode::NOT, {ExternalPort{i}}));
    load_code(f, addr("R0"), codes.back(), i);
  }
  auto& t = f.cell(addr("R0"));
  t.active_slot = 2;
  EXPECT_EQ(t.code(), codes[2]);
  EXPECT_THROW(load_code(f, addr("R0"), c, 4), Error);
  EXPECT_THROW(load_code(f, addr("1/L.B0"), c), Error);
  try {
    load_code(f, addr("L.B0"), c, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
    EXPECT_NE(std::string(e.what()).find("L.B0"), std::string::npos);
  }
}

TEST(Fabric, NormalizeClearsUnusedSelectors) {
  GeneticCode a;
  a.op = Opcode::NOT;
  a.input_select = {ExternalPort{0}, ExternalPort{5}, Constant{3}, Unused{}};
  GeneticCode b;
  b.op = Opcode::NOT;
  b.input_select = {ExternalPort{0}, Unused{}, Unused{}, Unused{}};
  EXPECT_NE(a, b);
  EXPECT_EQ(a.normalize(), b.normalize());
}

TEST(Routing, RerouteMovesConsumers) {
  Fabric f(1);
  const auto f0 = addr("F0"), r0 = addr("R0"), s = addr("L.S0.u0");
  f.routing.assign(f0, f0);
  f.cell(r0).output = 77;
  f.cell(r0).output_valid = true;
  transition(f.cell(f0).mode, CellMode::DEAD);
  reroute(f, f0, r0);
  EXPECT_EQ(f.routing.holder(f0), r0);
  EXPECT_EQ(f.read(CellOutput{f0}), (std::pair<Word, bool>{77, true}));
  // Second hop onto a stem unit.
  transition(f.cell(r0).mode, CellMode::HEALING);
  transition(f.cell(r0).mode, CellMode::DEAD);
  reroute(f, r0, s);
  EXPECT_EQ(f.routing.holder(f0), s);
}

TEST(Routing, RerouteErrors) {
  Fabric f(1);
  const auto f0 = addr("F0"), f1 = addr("F2"), r0 = addr("R0");
  f.routing.assign(f0, f0);
  f.routing.assign(f1, f1);
  EXPECT_THROW(reroute(f, f0, r0), Error);  // F0 still alive
  transition(f.cell(f0).mode, CellMode::DEAD);
  reroute(f, f0, r0);
  transition(f.cell(f1).mode, CellMode::DEAD);
  try {
    reroute(f, f1, r0);  // R0 already holds F0's role
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SpareExhausted);
  }
}

TEST(Routing, RandomOrdersNeverReferenceDeadCells) {
  // Oracle: walk every role to its holder and check liveness.
  std::mt19937 rng(171);
  for (int trial = 0; trial < 200; ++trial) {
    Fabric f(1);
    std::vector<CellAddr> roles, spares;
    for (int i = 0; i < kCellsPerSide; ++i) {
      roles.push_back(CellAddr{CellKind::B, Side::LEFT, i, 0});
      spares.push_back(CellAddr{CellKind::T, Side::LEFT, i, 0});
    }
    for (int i = 0; i < kCellsPerSide; ++i) spares.push_back(CellAddr{CellKind::STEM_UNIT, Side::LEFT, i, 0});
    for (const auto& r : roles) f.routing.assign(r, r);
    size_t next = 0;
    for (int k = 0; k < 12; ++k) {
      const auto role = roles[rng() % roles.size()];
      auto h = f.routing.holder(role);
      if (!h) continue;
      auto& c = f.cell(*h);
      transition(c.mode, CellMode::DEAD);
      if (next == spares.size()) {
        f.routing.disable(role);
        continue;
      }
      reroute(f, *h, spares[next]);
      transition(f.cell(spares[next++]).mode, CellMode::HEALING);
      for (const auto& [r, holder] : f.routing.table()) {
        if (holder) ASSERT_NE(f.cell(*holder).mode, CellMode::DEAD) << to_string(r);
      }
    }
  }
}

TEST(Fabric, DumpListsEveryCell) {
  Fabric f(1);
  const auto d = f.dump();
  EXPECT_EQ(std::count(d.begin(), d.end(), '\n'), kCellsPerLayer);
  EXPECT_NE(d.find("L.B0 ACTIVE"), std::string::npos);
}
