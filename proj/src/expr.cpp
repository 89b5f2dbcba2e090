#include "rdfleet/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "rdfleet/error.hpp"

namespace rdfleet {
namespace {

using Op = PropensityExpr::Op;
using Node = PropensityExpr::Node;

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::size_t pos;
  double number = 0.0;
  std::string text;
};

[[noreturn]] void fail(const std::string& msg, std::size_t pos) {
  throw ParseError(msg + " at position " + std::to_string(pos), 0, pos);
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + j, v);
      if (ec != std::errc() || ptr != src.data() + j) fail("malformed number '" + std::string(src.substr(i, j - i)) + "'", i);
      out.push_back({Tok::Number, start, v, {}});
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::Ident, start, 0.0, std::string(src.substr(i, j - i))});
      i = j;
      continue;
    }
    Tok t;
    switch (c) {
      case '+': t = Tok::Plus; break;
      case '-': t = Tok::Minus; break;
      case '*': t = Tok::Star; break;
      case '/': t = Tok::Slash; break;
      case '^': t = Tok::Caret; break;
      case '(': t = Tok::LParen; break;
      case ')': t = Tok::RParen; break;
      case ',': t = Tok::Comma; break;
      default: fail(std::string("unknown token '") + c + "'", i);
    }
    out.push_back({t, start, 0.0, {}});
    ++i;
  }
  out.push_back({Tok::End, src.size(), 0.0, {}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  PropensityExpr run(std::vector<Node>& nodes) {
    nodes_ = &nodes;
    if (peek().kind == Tok::End) fail("empty expression", 0);
    const auto root = sum();
    if (peek().kind == Tok::RParen) fail("unbalanced parenthesis: unexpected ')'", peek().pos);
    if (peek().kind != Tok::End) fail("unexpected token", peek().pos);
    return PropensityExpr::from_nodes(std::move(nodes), root);
  }

 private:
  const Token& peek() const { return toks_[at_]; }
  const Token& take() { return toks_[at_++]; }

  std::int32_t add(Node n) {
    nodes_->push_back(std::move(n));
    return static_cast<std::int32_t>(nodes_->size() - 1);
  }

  std::int32_t sum() {
    auto lhs = product();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const Token& t = take();
      auto rhs = product();
      lhs = add({t.kind == Tok::Plus ? Op::Add : Op::Sub, 0.0, {}, lhs, rhs, t.pos});
    }
    return lhs;
  }

  std::int32_t product() {
    auto lhs = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const Token& t = take();
      auto rhs = unary();
      lhs = add({t.kind == Tok::Star ? Op::Mul : Op::Div, 0.0, {}, lhs, rhs, t.pos});
    }
    return lhs;
  }

  std::int32_t unary() {
    if (peek().kind == Tok::Minus) {
      const Token& t = take();
      auto operand = unary();
      return add({Op::Neg, 0.0, {}, operand, -1, t.pos});
    }
    return power();
  }

  std::int32_t exponent() {
    if (peek().kind == Tok::Minus) {
      const Token& t = take();
      auto operand = exponent();
      return add({Op::Neg, 0.0, {}, operand, -1, t.pos});
    }
    return primary();
  }

  std::int32_t power() {
    auto lhs = primary();
    while (peek().kind == Tok::Caret) {
      const Token& t = take();
      auto rhs = exponent();
      lhs = add({Op::Pow, 0.0, {}, lhs, rhs, t.pos});
    }
    return lhs;
  }

  std::int32_t primary() {
    const Token& t = take();
    switch (t.kind) {
      case Tok::Number:
        return add({Op::Number, t.number, {}, -1, -1, t.pos});
      case Tok::Ident: {
        if (peek().kind != Tok::LParen) return add({Op::Identifier, 0.0, t.text, -1, -1, t.pos});
        Op op;
        std::size_t arity;
        if (t.text == "min") {
          op = Op::Min, arity = 2;
        } else if (t.text == "max") {
          op = Op::Max, arity = 2;
        } else if (t.text == "exp") {
          op = Op::Exp, arity = 1;
        } else if (t.text == "pow") {
          op = Op::PowFn, arity = 2;
        } else {
          fail("unknown function '" + t.text + "'", t.pos);
        }
        const Token& open = take();
        std::vector<std::int32_t> args{sum()};
        while (peek().kind == Tok::Comma) {
          take();
          args.push_back(sum());
        }
        if (peek().kind != Tok::RParen) fail("unbalanced parenthesis: '(' opened here is not closed", open.pos);
        take();
        if (args.size() != arity) {
          fail("function '" + t.text + "' takes " + std::to_string(arity) + " argument(s)", t.pos);
        }
        return add({op, 0.0, {}, args[0], arity == 2 ? args[1] : -1, t.pos});
      }
      case Tok::LParen: {
        auto inner = sum();
        if (peek().kind != Tok::RParen) fail("unbalanced parenthesis: '(' opened here is not closed", t.pos);
        take();
        return inner;
      }
      case Tok::RParen:
        fail("unbalanced parenthesis: unexpected ')'", t.pos);
      case Tok::End:
        fail("unexpected end of expression", t.pos);
      default:
        fail("unexpected operator", t.pos);
    }
  }

  std::vector<Token> toks_;
  std::size_t at_ = 0;
  std::vector<Node>* nodes_ = nullptr;
};

int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;  // atoms and calls
  }
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void print(const std::vector<Node>& nodes, std::int32_t idx, std::string& out);

void print_wrapped(const std::vector<Node>& nodes, std::int32_t idx, bool wrap, std::string& out) {
  if (wrap) out.push_back('(');
  print(nodes, idx, out);
  if (wrap) out.push_back(')');
}

void print(const std::vector<Node>& nodes, std::int32_t idx, std::string& out) {
  const Node& n = nodes[idx];
  switch (n.op) {
    case Op::Number: out += format_number(n.value); return;
    case Op::Identifier: out += n.name; return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(n.op);
      print_wrapped(nodes, n.lhs, precedence(nodes[n.lhs].op) < p, out);
      out += n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? "*" : "/";
      print_wrapped(nodes, n.rhs, precedence(nodes[n.rhs].op) <= p, out);
      return;
    }
    case Op::Neg:
      out.push_back('-');
      print_wrapped(nodes, n.lhs, precedence(nodes[n.lhs].op) < precedence(Op::Neg), out);
      return;
    case Op::Pow: {
      print_wrapped(nodes, n.lhs, precedence(nodes[n.lhs].op) < precedence(Op::Pow), out);
      out.push_back('^');
      // exponent is a primary optionally preceded by minus signs
      std::int32_t e = n.rhs;
      while (nodes[e].op == Op::Neg) {
        out.push_back('-');
        e = nodes[e].lhs;
      }
      print_wrapped(nodes, e, precedence(nodes[e].op) < 5, out);
      return;
    }
    case Op::Min:
    case Op::Max:
    case Op::PowFn:
      out += n.op == Op::Min ? "min(" : n.op == Op::Max ? "max(" : "pow(";
      print(nodes, n.lhs, out);
      out += ", ";
      print(nodes, n.rhs, out);
      out.push_back(')');
      return;
    case Op::Exp:
      out += "exp(";
      print(nodes, n.lhs, out);
      out.push_back(')');
      return;
  }
}

bool same(const std::vector<Node>& a, std::int32_t ia, const std::vector<Node>& b, std::int32_t ib) {
  if (ia < 0 || ib < 0) return ia == ib;
  const Node& x = a[ia];
  const Node& y = b[ib];
  if (x.op != y.op) return false;
  if (x.op == Op::Number) return x.value == y.value;
  if (x.op == Op::Identifier) return x.name == y.name;
  return same(a, x.lhs, b, y.lhs) && same(a, x.rhs, b, y.rhs);
}

}  // namespace

PropensityExpr PropensityExpr::parse(std::string_view source) {
  std::vector<Node> nodes;
  return Parser(source).run(nodes);
}

PropensityExpr PropensityExpr::from_nodes(std::vector<Node> nodes, std::int32_t root) {
  PropensityExpr e;
  e.nodes_ = std::move(nodes);
  e.root_ = root;
  return e;
}

std::string PropensityExpr::to_string() const {
  std::string out;
  if (root_ >= 0) print(nodes_, root_, out);
  return out;
}

std::vector<std::string> PropensityExpr::identifiers() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    if (n.op == Op::Identifier && std::find(out.begin(), out.end(), n.name) == out.end()) out.push_back(n.name);
  }
  return out;
}

bool PropensityExpr::same_tree(const PropensityExpr& other) const { return same(nodes_, root_, other.nodes_, other.root_); }

BoundExpr BoundExpr::bind(const PropensityExpr& expr, const Resolver& resolve) {
  BoundExpr b;
  const auto& nodes = expr.nodes();
  std::size_t depth = 0;
  // post-order walk
  auto emit = [&](auto&& self, std::int32_t idx) -> void {
    const Node& n = nodes[idx];
    if (n.lhs >= 0) self(self, n.lhs);
    if (n.rhs >= 0) self(self, n.rhs);
    Instr in{n.op, ExprSlot::Kind::Constant, 0, n.value};
    if (n.op == Op::Identifier) {
      auto slot = resolve(n.name);
      if (!slot) throw ParseError("unresolved identifier '" + n.name + "' at position " + std::to_string(n.position), 0, n.position);
      in.kind = slot->kind;
      in.species = slot->species;
      in.value = slot->value;
      if (slot->kind == ExprSlot::Kind::SpeciesCount &&
          std::find(b.deps_.begin(), b.deps_.end(), slot->species) == b.deps_.end()) {
        b.deps_.push_back(slot->species);
      }
    }
    if (n.op == Op::Number || n.op == Op::Identifier) {
      ++depth;
    } else if (n.rhs >= 0) {
      --depth;
    }
    b.max_stack_ = std::max(b.max_stack_, depth);
    b.code_.push_back(in);
  };
  if (expr.root() < 0) throw ParseError("empty expression", 0, 0);
  emit(emit, expr.root());
  std::sort(b.deps_.begin(), b.deps_.end());
  return b;
}

double BoundExpr::evaluate(std::span<const std::int64_t> counts, double volume) const {
  double stack_buf[32] = {};
  std::vector<double> heap;
  double* st = stack_buf;
  if (max_stack_ > 32) {
    heap.resize(max_stack_);
    st = heap.data();
  }
  std::size_t sp = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Number: st[sp++] = in.value; break;
      case Op::Identifier:
        st[sp++] = in.kind == ExprSlot::Kind::SpeciesCount ? static_cast<double>(counts[in.species])
                   : in.kind == ExprSlot::Kind::Volume   ? volume
                                                         : in.value;
        break;
      case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
      case Op::Exp: st[sp - 1] = std::exp(st[sp - 1]); break;
      default: {
        const double r = st[--sp];
        double& l = st[sp - 1];
        switch (in.op) {
          case Op::Add: l += r; break;
          case Op::Sub: l -= r; break;
          case Op::Mul: l *= r; break;
          case Op::Div: l /= r; break;
          case Op::Pow:
          case Op::PowFn: l = std::pow(l, r); break;
          case Op::Min: l = std::min(l, r); break;
          case Op::Max: l = std::max(l, r); break;
          default: break;
        }
      }
    }
  }
  return st[0];
}

}  // namespace rdfleet
