#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "selfheal/trace.hpp"

namespace selfheal {

using Ratio = boost::rational<std::int64_t>;

// Self-healing capacity coverage min(spares / spf, 1). Throws on spf == 0.
Ratio coverage(std::int64_t spares, std::int64_t spf);
Ratio coverage(Ratio spares, std::int64_t spf);

// (spares + routing) / functional * 100. Throws on functional == 0.
Ratio area_overhead(Ratio spares, Ratio routing, Ratio functional);

// Decimal rendering truncated (not rounded) to `digits` places; integers print
// without a fractional part.
std::string render_truncated(Ratio value, int digits = 3);

struct ArchRow {
  std::string name;
  Ratio functional;
  Ratio spares;
  Ratio routing;
  Ratio coverage;
  Ratio overhead;  // percent
};

// The four compared architectures at an N x N array (n even, >= 2):
// proposed, re-routing, gene control, voting-by-majority.
std::vector<ArchRow> architecture_table(int n, std::int64_t spf);

// Text renderings: the comparison table, and the coverage/overhead series over
// even n in [n_min, n_max].
std::string table_csv(int n, std::int64_t spf);
std::string series_csv(int n_min, int n_max, std::int64_t spf);

// Physical spare pool of one layer in the simulator (T cells + stem units),
// reported alongside the formula-based count.
inline constexpr int kPhysicalSparesPerLayer = 16;

struct FaultLatency {
  std::int64_t injected_ns = 0;
  std::string target;
  std::optional<std::int64_t> healed_ns;
  std::optional<std::int64_t> latency_ns;
};

// Pairs every permanent FAULT row with the heal that replaced its cell:
// latency = heal completion (substitute's first done) - injection.
std::vector<FaultLatency> recovery_latency(const Trace& trace);

}  // namespace selfheal
