#include "selfheal/property.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <variant>

#include "selfheal/error.hpp"

namespace selfheal {

enum class Cmp { EQ, NE, GE, LE, GT, LT };

struct SigOperand {
  std::string name;
  bool golden = false;
};
using PropOperand = std::variant<SigOperand, std::int64_t>;

struct PropNode {
  enum class Kind { COMPARE, TRUTH, RISING, NOT, AND, OR, IMPLIES, EVENTUALLY, ALWAYS } kind;
  PropOperand lhs{std::int64_t{0}};
  PropOperand rhs{std::int64_t{0}};
  Cmp cmp = Cmp::EQ;
  int horizon = 0;
  PropPtr a{};
  PropPtr b{};
};

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  PropPtr parse() {
    auto p = impl();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& why) {
    throw Error(ErrorKind::Property, "property: " + why + " at offset " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool eat(std::string_view tok) {
    skip();
    if (s_.substr(pos_).starts_with(tok)) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!eat(tok)) fail("expected '" + std::string(tok) + "'");
  }

  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '/';
  }

  std::string ident() {
    skip();
    size_t start = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    if (start == pos_ || std::isdigit(static_cast<unsigned char>(s_[start]))) {
      fail("expected signal name");
    }
    return std::string(s_.substr(start, pos_ - start));
  }

  // Keyword followed by one of `next` (without consuming `next`).
  bool keyword(std::string_view kw, char next) {
    skip();
    size_t p = pos_;
    if (!s_.substr(p).starts_with(kw)) return false;
    p += kw.size();
    while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
    if (p < s_.size() && s_[p] == next) {
      pos_ = p;
      return true;
    }
    return false;
  }

  static PropPtr node(PropNode n) { return std::make_shared<const PropNode>(std::move(n)); }

  PropPtr impl() {
    auto lhs = disj();
    if (eat("->") || eat("=>")) {
      PropNode n{PropNode::Kind::IMPLIES};
      n.a = lhs;
      n.b = impl();
      return node(std::move(n));
    }
    return lhs;
  }

  PropPtr disj() {
    auto lhs = conj();
    while (eat("||") || eat("|")) {
      PropNode n{PropNode::Kind::OR};
      n.a = lhs;
      n.b = conj();
      lhs = node(std::move(n));
    }
    return lhs;
  }

  PropPtr conj() {
    auto lhs = unary();
    while (eat("&&") || eat("&")) {
      PropNode n{PropNode::Kind::AND};
      n.a = lhs;
      n.b = unary();
      lhs = node(std::move(n));
    }
    return lhs;
  }

  PropPtr unary() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '!' && !s_.substr(pos_).starts_with("!=")) {
      ++pos_;
      PropNode n{PropNode::Kind::NOT};
      n.a = unary();
      return node(std::move(n));
    }
    if (keyword("G", '(')) {
      expect("(");
      PropNode n{PropNode::Kind::ALWAYS};
      n.a = impl();
      expect(")");
      return node(std::move(n));
    }
    if (keyword("F", '[')) {
      expect("[");
      skip();
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      PropNode n{PropNode::Kind::EVENTUALLY};
      auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, n.horizon);
      if (ec != std::errc() || start == pos_) fail("expected horizon");
      expect("]");
      expect("(");
      n.a = impl();
      expect(")");
      return node(std::move(n));
    }
    if (keyword("F", '(')) fail("F needs an explicit horizon F[H](...)");
    if (keyword("rising", '(')) {
      expect("(");
      PropNode n{PropNode::Kind::RISING};
      n.lhs = SigOperand{ident(), false};
      expect(")");
      return node(std::move(n));
    }
    if (eat("(")) {
      auto p = impl();
      expect(")");
      return p;
    }
    PropNode n{PropNode::Kind::TRUTH};
    n.lhs = operand();
    static const std::pair<std::string_view, Cmp> ops[] = {
        {"==", Cmp::EQ}, {"!=", Cmp::NE}, {">=", Cmp::GE},
        {"<=", Cmp::LE}, {">", Cmp::GT},  {"<", Cmp::LT}};
    for (const auto& [tok, c] : ops) {
      if (eat(tok)) {
        n.kind = PropNode::Kind::COMPARE;
        n.cmp = c;
        n.rhs = operand();
        break;
      }
    }
    return node(std::move(n));
  }

  PropOperand operand() {
    skip();
    if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-')) {
      size_t start = pos_++;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
      if (ec != std::errc()) fail("bad integer");
      return v;
    }
    if (keyword("golden", '(')) {
      expect("(");
      SigOperand g{ident(), true};
      expect(")");
      return g;
    }
    return SigOperand{ident(), false};
  }

  std::string_view s_;
  size_t pos_ = 0;
};

enum Tri : std::uint8_t { F = 0, U = 1, T = 2 };

using Samples = std::vector<std::optional<std::int64_t>>;

class Evaluator {
 public:
  Evaluator(const Trace& trace, const Trace* golden)
      : trace_(trace), golden_(golden), n_(trace.end_ns() / kNsPerHalfTick + 1) {}

  size_t size() const { return n_; }

  std::vector<Tri> eval(const PropNode& node) {
    using K = PropNode::Kind;
    std::vector<Tri> r(n_, F);
    switch (node.kind) {
      case K::COMPARE: {
        for (size_t i = 0; i < n_; ++i) {
          auto l = value(node.lhs, i);
          auto rv = value(node.rhs, i);
          bool ok;
          if (l && rv) ok = compare(*l, node.cmp, *rv);
          else if (node.cmp == Cmp::EQ) ok = !l && !rv;
          else if (node.cmp == Cmp::NE) ok = l.has_value() != rv.has_value();
          else ok = false;
          r[i] = ok ? T : F;
        }
        break;
      }
      case K::TRUTH:
        for (size_t i = 0; i < n_; ++i) {
          auto v = value(node.lhs, i);
          r[i] = (v && *v != 0) ? T : F;
        }
        break;
      case K::RISING: {
        for (size_t i = 0; i < n_; ++i) {
          auto v = value(node.lhs, i);
          auto prev = i == 0 ? std::nullopt : value(node.lhs, i - 1);
          r[i] = (v && *v != 0 && (!prev || *prev == 0)) ? T : F;
        }
        break;
      }
      case K::NOT: {
        auto a = eval(*node.a);
        for (size_t i = 0; i < n_; ++i) r[i] = static_cast<Tri>(2 - a[i]);
        break;
      }
      case K::AND:
      case K::OR:
      case K::IMPLIES: {
        auto a = eval(*node.a);
        auto b = eval(*node.b);
        for (size_t i = 0; i < n_; ++i) {
          if (node.kind == K::AND) r[i] = std::min(a[i], b[i]);
          else if (node.kind == K::OR) r[i] = std::max(a[i], b[i]);
          else r[i] = std::max(static_cast<Tri>(2 - a[i]), b[i]);
        }
        break;
      }
      case K::EVENTUALLY: {
        auto a = eval(*node.a);
        const size_t h = static_cast<size_t>(node.horizon);
        for (size_t i = 0; i < n_; ++i) {
          Tri best = F;
          for (size_t j = i; j <= i + h && j < n_; ++j) best = std::max(best, a[j]);
          if (best != T && i + h >= n_) best = U;
          r[i] = best;
        }
        break;
      }
      case K::ALWAYS: {
        auto a = eval(*node.a);
        Tri acc = T;
        for (size_t i = n_; i-- > 0;) {
          acc = std::min(acc, a[i]);
          r[i] = acc;
        }
        break;
      }
    }
    return r;
  }

  void check_signals(const PropNode& node) {
    auto check = [&](const PropOperand& o) {
      if (auto* s = std::get_if<SigOperand>(&o)) {
        if (s->golden) {
          if (!golden_) throw Error(ErrorKind::Property, "golden(" + s->name + ") needs a golden trace");
          if (!golden_->has_signal(s->name)) {
            throw Error(ErrorKind::Property, "unknown golden signal '" + s->name + "'");
          }
        } else if (!trace_.has_signal(s->name)) {
          throw Error(ErrorKind::Property, "unknown signal '" + s->name + "'");
        }
      }
    };
    check(node.lhs);
    check(node.rhs);
    if (node.a) check_signals(*node.a);
    if (node.b) check_signals(*node.b);
  }

 private:
  static bool compare(std::int64_t l, Cmp c, std::int64_t r) {
    switch (c) {
      case Cmp::EQ: return l == r;
      case Cmp::NE: return l != r;
      case Cmp::GE: return l >= r;
      case Cmp::LE: return l <= r;
      case Cmp::GT: return l > r;
      case Cmp::LT: return l < r;
    }
    return false;
  }

  const Samples& samples(const SigOperand& s) {
    auto key = (s.golden ? "g:" : "t:") + s.name;
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const Trace& src = s.golden ? *golden_ : trace_;
    Samples out(n_);
    std::optional<std::int64_t> cur;
    size_t i = 0;
    for (const auto& row : src.rows()) {
      const std::int64_t pos = row.time_ns / kNsPerHalfTick;
      while (i < n_ && static_cast<std::int64_t>(i) < pos) out[i++] = cur;
      if (row.kind == RowKind::SIGNAL && row.name == s.name) cur = std::stoll(row.value);
    }
    while (i < n_) out[i++] = cur;
    return cache_.emplace(key, std::move(out)).first->second;
  }

  std::optional<std::int64_t> value(const PropOperand& o, size_t i) {
    if (auto* v = std::get_if<std::int64_t>(&o)) return *v;
    return samples(std::get<SigOperand>(o))[i];
  }

  const Trace& trace_;
  const Trace* golden_;
  size_t n_;
  std::map<std::string, Samples> cache_;
};

}  // namespace

TemporalProperty parse_property(std::string_view text) {
  return TemporalProperty{Parser(text).parse(), std::string(text)};
}

std::string_view to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::HOLDS: return "HOLDS";
    case VerdictKind::VIOLATED: return "VIOLATED";
    case VerdictKind::INCONCLUSIVE: return "INCONCLUSIVE";
  }
  return "?";
}

Verdict check_property(const Trace& trace, const TemporalProperty& prop, const Trace* golden) {
  if (!prop.root) throw Error(ErrorKind::Property, "empty property");
  Evaluator ev(trace, golden);
  ev.check_signals(*prop.root);
  Verdict v;
  const PropNode& root = *prop.root;
  if (root.kind == PropNode::Kind::ALWAYS) {
    auto body = ev.eval(*root.a);
    auto f = std::find(body.begin(), body.end(), F);
    if (f != body.end()) {
      v.kind = VerdictKind::VIOLATED;
      v.counterexample_ns = static_cast<std::int64_t>(f - body.begin()) * kNsPerHalfTick;
    } else if (std::find(body.begin(), body.end(), U) != body.end()) {
      v.kind = VerdictKind::INCONCLUSIVE;
    }
    return v;
  }
  auto r = ev.eval(root);
  if (r.at(0) == F) {
    v.kind = VerdictKind::VIOLATED;
    v.counterexample_ns = 0;
  } else if (r.at(0) == U) {
    v.kind = VerdictKind::INCONCLUSIVE;
  }
  return v;
}

}  // namespace selfheal
