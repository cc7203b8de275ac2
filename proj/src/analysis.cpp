#include "selfheal/analysis.hpp"

#include <algorithm>
#include <sstream>

#include "selfheal/error.hpp"

namespace selfheal {

Ratio coverage(Ratio spares, std::int64_t spf) {
  if (spf <= 0) throw Error(ErrorKind::Domain, "SPF must be positive");
  return std::min(spares / spf, Ratio(1));
}

Ratio coverage(std::int64_t spares, std::int64_t spf) { return coverage(Ratio(spares), spf); }

Ratio area_overhead(Ratio spares, Ratio routing, Ratio functional) {
  if (functional <= Ratio(0)) throw Error(ErrorKind::Domain, "functional cell count must be positive");
  return (spares + routing) / functional * 100;
}

std::string render_truncated(Ratio v, int digits) {
  std::string sign = v < Ratio(0) ? "-" : "";
  if (v < Ratio(0)) v = -v;
  const std::int64_t whole = v.numerator() / v.denominator();
  Ratio frac = v - whole;
  if (frac.numerator() == 0) return sign + std::to_string(whole);
  std::int64_t scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const Ratio scaled = frac * scale;
  const std::int64_t f = scaled.numerator() / scaled.denominator();
  std::string fs = std::to_string(f);
  fs.insert(0, static_cast<size_t>(digits) - fs.size(), '0');
  return sign + std::to_string(whole) + "." + fs;
}

std::vector<ArchRow> architecture_table(int n, std::int64_t spf) {
  if (n < 2 || n % 2 != 0) throw Error(ErrorKind::Domain, "array size must be even and >= 2");
  const Ratio sq(static_cast<std::int64_t>(n) * n);
  const Ratio functional = sq / 2;
  std::vector<ArchRow> rows = {
      {"proposed", functional, sq / 2 + sq / 4, 0, 0, 0},
      {"re-routing", functional, sq / 4, sq / 2, 0, 0},
      {"gene-control", functional, sq / 2, 0, 0, 0},
      {"voting-by-majority", functional, sq / 2 + sq / 8, 0, 0, 0},
  };
  for (auto& r : rows) {
    r.coverage = coverage(r.spares, spf);
    r.overhead = area_overhead(r.spares, r.routing, r.functional);
  }
  return rows;
}

std::string table_csv(int n, std::int64_t spf) {
  std::ostringstream os;
  os << "architecture,functional_cells,spare_cells,routing_cells,coverage,area_overhead_pct\n";
  for (const auto& r : architecture_table(n, spf)) {
    os << r.name << ',' << render_truncated(r.functional) << ',' << render_truncated(r.spares)
       << ',' << render_truncated(r.routing) << ',' << render_truncated(r.coverage) << ','
       << render_truncated(r.overhead) << '\n';
  }
  os << "# physical spare pool per layer (T cells + stem units): " << kPhysicalSparesPerLayer
     << '\n';
  return os.str();
}

std::string series_csv(int n_min, int n_max, std::int64_t spf) {
  std::ostringstream os;
  os << "n,architecture,coverage,area_overhead_pct\n";
  for (int n = n_min + (n_min % 2); n <= n_max; n += 2) {
    for (const auto& r : architecture_table(n, spf)) {
      os << n << ',' << r.name << ',' << render_truncated(r.coverage) << ','
         << render_truncated(r.overhead) << '\n';
    }
  }
  return os.str();
}

std::vector<FaultLatency> recovery_latency(const Trace& trace) {
  std::vector<FaultLatency> out;
  const auto& rows = trace.rows();
  auto cell_of = [](const std::string& target) {
    auto p = target.rfind(".gfb");
    return p == std::string::npos ? target : target.substr(0, p);
  };
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.kind != RowKind::FAULT) continue;
    if (!r.value.starts_with("permanent") && !r.value.starts_with("ccf")) continue;
    FaultLatency fl;
    fl.injected_ns = r.time_ns;
    fl.target = r.name;
    const std::string cell = cell_of(r.name);
    // The cell's DEACTIVATE, then its substitute's completion.
    std::optional<std::string> substitute;
    for (size_t j = i; j < rows.size() && !fl.healed_ns; ++j) {
      const auto& h = rows[j];
      if (!substitute && h.kind == RowKind::HEAL && h.name == "REROUTE" &&
          h.value.starts_with(cell + ",")) {
        auto rest = h.value.substr(cell.size() + 1);
        substitute = rest.substr(0, rest.find(','));
      } else if (substitute && h.kind == RowKind::EVENT && h.name == "heal_complete" &&
                 h.value == cell + "->" + *substitute) {
        fl.healed_ns = h.time_ns;
        fl.latency_ns = h.time_ns - r.time_ns;
      }
    }
    out.push_back(fl);
  }
  return out;
}

}  // namespace selfheal
