#include "selfheal/faults.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "selfheal/error.hpp"

namespace selfheal {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  int base = 10;
  if (s.starts_with("0x") || s.starts_with("0X")) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
  return ec == std::errc() && p == s.data() + s.size();
}

FaultTarget parse_target(std::string_view text, int line, int max_layers) {
  FaultTarget t;
  auto fail = [&](const std::string& why) -> FaultTarget {
    throw ParseError(line, why + " '" + std::string(text) + "'");
  };
  if (text.starts_with("healing") || text.starts_with("monitor") || text.starts_with("syndrome")) {
    fail("healing-layer components cannot be targeted:");
  }
  std::string_view where;
  std::string_view sub;
  if (auto p = text.rfind(".hru"); p != std::string_view::npos) {
    where = text.substr(0, p);
    sub = text.substr(p + 1);
    auto rep = sub.find(".rep");
    if (rep == std::string_view::npos || !parse_number(sub.substr(3, rep - 3), t.hru) ||
        !parse_number(sub.substr(rep + 4), t.replica) || t.hru < 0 || t.hru >= kHrusPerCell ||
        t.replica < 0 || t.replica > 2) {
      fail("bad HRU target");
    }
    t.is_hru = true;
  } else if (auto g = text.rfind(".gfb"); g != std::string_view::npos) {
    where = text.substr(0, g);
    if (!parse_number(text.substr(g + 4), t.gfb_copy) || t.gfb_copy < 0 || t.gfb_copy > 1) {
      fail("bad GFB target");
    }
  } else {
    fail("target needs .hru<i>.rep<j> or .gfb<0|1>:");
  }
  if (where.starts_with('@')) {
    if (where.size() < 2) fail("empty block name in");
    t.block = std::string(where.substr(1));
  } else {
    auto addr = parse_cell_addr(where);
    if (!addr) fail("unknown address");
    if (max_layers > 0 && addr->layer >= max_layers) fail("unknown address");
    t.cell = addr;
  }
  return t;
}

}  // namespace

std::string_view to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::TRANSIENT_REG: return "transient";
    case FaultKind::PERMANENT_GFB: return "permanent";
    case FaultKind::CCF: return "ccf";
  }
  return "?";
}

std::string to_string(const FaultTarget& t) {
  std::string s = t.cell ? to_string(*t.cell) : "@" + t.block.value_or("?");
  if (t.is_hru) {
    s += ".hru" + std::to_string(t.hru) + ".rep" + std::to_string(t.replica);
  } else {
    s += ".gfb" + std::to_string(t.gfb_copy);
  }
  return s;
}

std::string Fault::payload() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%04X", static_cast<unsigned>(mask));
  if (kind == FaultKind::TRANSIENT_REG) return std::string("flip:") + buf;
  return std::string(stuck_value ? "stuck1:" : "stuck0:") + buf;
}

FaultSchedule parse_schedule(std::string_view text, int max_layers) {
  FaultSchedule sched;
  std::istringstream in{std::string(text)};
  std::string buf;
  int lineno = 0;
  while (std::getline(in, buf)) {
    ++lineno;
    std::string_view line = buf;
    if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;

    std::vector<std::string_view> f;
    size_t start = 0;
    while (true) {
      auto c = line.find(',', start);
      f.push_back(trim(line.substr(start, c - start)));
      if (c == std::string_view::npos) break;
      start = c + 1;
    }
    if (f.size() != 4) throw ParseError(lineno, "expected time_ns,kind,target,payload");

    Fault fault;
    fault.id = static_cast<int>(sched.faults.size());
    if (!parse_number(f[0], fault.time_ns) || fault.time_ns < 0) {
      throw ParseError(lineno, "bad time '" + std::string(f[0]) + "'");
    }
    if (fault.time_ns % 5 != 0) throw ParseError(lineno, "time not multiple of 5");

    if (f[1] == "transient") fault.kind = FaultKind::TRANSIENT_REG;
    else if (f[1] == "permanent") fault.kind = FaultKind::PERMANENT_GFB;
    else if (f[1] == "ccf") fault.kind = FaultKind::CCF;
    else throw ParseError(lineno, "malformed kind '" + std::string(f[1]) + "'");

    std::string_view targets = f[2];
    size_t s = 0;
    while (true) {
      auto p = targets.find('+', s);
      fault.targets.push_back(parse_target(trim(targets.substr(s, p - s)), lineno, max_layers));
      if (p == std::string_view::npos) break;
      s = p + 1;
    }

    auto colon = f[3].find(':');
    if (colon == std::string_view::npos) throw ParseError(lineno, "malformed payload");
    auto ptype = f[3].substr(0, colon);
    unsigned mask = 0;
    if (!parse_number(f[3].substr(colon + 1), mask) || mask > 0xFFFF) {
      throw ParseError(lineno, "bad payload mask");
    }
    fault.mask = static_cast<Word>(mask);

    if (fault.kind == FaultKind::TRANSIENT_REG) {
      if (ptype != "flip") throw ParseError(lineno, "transient payload must be flip:<mask>");
      if (fault.targets.size() != 1 || !fault.targets[0].is_hru) {
        throw ParseError(lineno, "transient must name exactly one HRU replica");
      }
    } else {
      if (ptype == "stuck0") fault.stuck_value = false;
      else if (ptype == "stuck1") fault.stuck_value = true;
      else throw ParseError(lineno, "permanent payload must be stuck0:<mask> or stuck1:<mask>");
      for (const auto& t : fault.targets) {
        if (t.is_hru) throw ParseError(lineno, "permanent faults target GFB copies");
      }
      if (fault.kind == FaultKind::PERMANENT_GFB && fault.targets.size() != 1) {
        throw ParseError(lineno, "permanent must name exactly one GFB copy");
      }
      if (fault.kind == FaultKind::CCF && fault.targets.size() < 2) {
        throw ParseError(lineno, "ccf needs at least two targets");
      }
    }
    sched.faults.push_back(std::move(fault));
  }
  std::stable_sort(sched.faults.begin(), sched.faults.end(),
                   [](const Fault& a, const Fault& b) { return a.time_ns < b.time_ns; });
  return sched;
}

}  // namespace selfheal
