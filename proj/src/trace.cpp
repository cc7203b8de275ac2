#include "selfheal/trace.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "selfheal/error.hpp"

namespace selfheal {

std::string_view to_string(RowKind kind) {
  switch (kind) {
    case RowKind::SIGNAL: return "SIGNAL";
    case RowKind::FAULT: return "FAULT";
    case RowKind::HEAL: return "HEAL";
    case RowKind::EVENT: return "EVENT";
  }
  return "?";
}

void Trace::add(std::int64_t time_ns, RowKind kind, std::string name, std::string value) {
  rows_.push_back({time_ns, kind, std::move(name), std::move(value), next_seq_++});
}

void Trace::finalize() {
  std::stable_sort(rows_.begin(), rows_.end(), [](const TraceRow& a, const TraceRow& b) {
    if (a.time_ns != b.time_ns) return a.time_ns < b.time_ns;
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.kind == RowKind::HEAL) return a.seq < b.seq;
    return a.name < b.name;
  });
}

std::int64_t Trace::end_ns() const {
  if (auto it = meta_.find("end_ns"); it != meta_.end()) return std::stoll(it->second);
  return rows_.empty() ? 0 : rows_.back().time_ns;
}

bool Trace::has_signal(std::string_view name) const {
  return std::any_of(rows_.begin(), rows_.end(), [&](const TraceRow& r) {
    return r.kind == RowKind::SIGNAL && r.name == name;
  });
}

std::optional<std::int64_t> Trace::value_at(std::string_view name, std::int64_t t) const {
  std::optional<std::int64_t> v;
  for (const auto& r : rows_) {
    if (r.time_ns > t) break;
    if (r.kind == RowKind::SIGNAL && r.name == name) v = std::stoll(r.value);
  }
  return v;
}

std::optional<std::int64_t> Trace::first_time(std::string_view name,
                                              std::optional<std::int64_t> value) const {
  for (const auto& r : rows_) {
    if (r.kind == RowKind::SIGNAL && r.name == name && (!value || std::stoll(r.value) == *value)) {
      return r.time_ns;
    }
  }
  return std::nullopt;
}

std::vector<TraceRow> Trace::filter(RowKind kind) const {
  std::vector<TraceRow> out;
  for (const auto& r : rows_) {
    if (r.kind == kind) out.push_back(r);
  }
  return out;
}

std::string Trace::to_csv() const {
  std::ostringstream os;
  for (const auto& [k, v] : meta_) os << "# " << k << '=' << v << '\n';
  os << "time_ns,kind,name,value\n";
  for (const auto& r : rows_) {
    os << r.time_ns << ',' << to_string(r.kind) << ',' << r.name << ',' << r.value << '\n';
  }
  return os.str();
}

Trace Trace::from_csv(std::string_view text) {
  Trace t;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.starts_with("#")) {
      auto body = line.substr(1);
      body.erase(0, body.find_first_not_of(' '));
      auto eq = body.find('=');
      if (eq != std::string::npos) t.meta_[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    if (!header) {
      if (line != "time_ns,kind,name,value") throw ParseError(lineno, "missing trace header");
      header = true;
      continue;
    }
    auto c1 = line.find(',');
    auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    auto c3 = c2 == std::string::npos ? c2 : line.find(',', c2 + 1);
    if (c3 == std::string::npos) throw ParseError(lineno, "expected time_ns,kind,name,value");
    std::int64_t time = 0;
    auto [p, ec] = std::from_chars(line.data(), line.data() + c1, time);
    if (ec != std::errc() || p != line.data() + c1) throw ParseError(lineno, "bad time");
    const std::string kind = line.substr(c1 + 1, c2 - c1 - 1);
    RowKind rk;
    if (kind == "SIGNAL") rk = RowKind::SIGNAL;
    else if (kind == "FAULT") rk = RowKind::FAULT;
    else if (kind == "HEAL") rk = RowKind::HEAL;
    else if (kind == "EVENT") rk = RowKind::EVENT;
    else throw ParseError(lineno, "unknown row kind '" + kind + "'");
    t.add(time, rk, line.substr(c2 + 1, c3 - c2 - 1), line.substr(c3 + 1));
  }
  if (!header) throw ParseError(0, "missing trace header");
  return t;
}

std::string signal_projection(const Trace& trace) {
  std::ostringstream os;
  for (const auto& r : trace.rows()) {
    if (r.kind == RowKind::SIGNAL) os << r.time_ns << ',' << r.name << ',' << r.value << '\n';
  }
  return os.str();
}

bool signals_equivalent(const Trace& a, const Trace& b, const std::vector<std::string>& names,
                        std::int64_t from_ns) {
  const std::int64_t end = std::min(a.end_ns(), b.end_ns());
  for (const auto& n : names) {
    for (std::int64_t t = from_ns; t <= end; t += kNsPerHalfTick) {
      if (a.value_at(n, t) != b.value_at(n, t)) return false;
    }
  }
  return true;
}

}  // namespace selfheal
