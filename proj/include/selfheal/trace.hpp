#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace selfheal {

inline constexpr std::int64_t kNsPerHalfTick = 5;

enum class RowKind : std::uint8_t { SIGNAL, FAULT, HEAL, EVENT };
std::string_view to_string(RowKind kind);

struct TraceRow {
  std::int64_t time_ns = 0;
  RowKind kind = RowKind::SIGNAL;
  std::string name;
  std::string value;  // decimal for SIGNAL rows; may contain commas for HEAL
  std::uint64_t seq = 0;

  bool operator==(const TraceRow& o) const {
    return time_ns == o.time_ns && kind == o.kind && name == o.name && value == o.value;
  }
};

// Flat, append-only record of a run. Serialized as comma-separated text:
// '# key=value' metadata lines, the header `time_ns,kind,name,value`, then one
// row per line (LF).
class Trace {
 public:
  void add(std::int64_t time_ns, RowKind kind, std::string name, std::string value);

  // Orders rows by time, then SIGNAL < FAULT < HEAL < EVENT, then name
  // (HEAL rows keep emission order so each heal sequence stays contiguous).
  void finalize();

  const std::vector<TraceRow>& rows() const { return rows_; }
  std::map<std::string, std::string>& metadata() { return meta_; }
  const std::map<std::string, std::string>& metadata() const { return meta_; }

  std::int64_t end_ns() const;
  bool has_signal(std::string_view name) const;
  // Last SIGNAL value of `name` at or before `time_ns`.
  std::optional<std::int64_t> value_at(std::string_view name, std::int64_t time_ns) const;
  // Time of the first SIGNAL row for `name` (optionally with a given value).
  std::optional<std::int64_t> first_time(std::string_view name,
                                         std::optional<std::int64_t> value = std::nullopt) const;

  std::vector<TraceRow> filter(RowKind kind) const;
  std::string to_csv() const;
  static Trace from_csv(std::string_view text);

 private:
  std::vector<TraceRow> rows_;
  std::map<std::string, std::string> meta_;
  std::uint64_t next_seq_ = 0;
};

// SIGNAL rows only, serialized; equal projections mean equal observable
// behaviour.
std::string signal_projection(const Trace& trace);

// True when every named signal has the same sampled value in both traces at
// every half-tick in [from_ns, min(end)].
bool signals_equivalent(const Trace& a, const Trace& b, const std::vector<std::string>& names,
                        std::int64_t from_ns);

}  // namespace selfheal
