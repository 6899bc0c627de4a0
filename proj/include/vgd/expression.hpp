#pragma once

#include "vgd/common.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vgd {

enum class Op : std::uint8_t { Add, Sub, Mul, Div };

inline constexpr Op kAllOps[] = {Op::Add, Op::Sub, Op::Mul, Op::Div};

inline char op_symbol(Op op) {
  switch (op) {
    case Op::Add: return '+';
    case Op::Sub: return '-';
    case Op::Mul: return '*';
    case Op::Div: return '/';
  }
  return '?';
}

inline std::optional<Op> op_from_char(char c) {
  switch (c) {
    case '+': return Op::Add;
    case '-': return Op::Sub;
    case '*': return Op::Mul;
    case '/': return Op::Div;
    default: return std::nullopt;
  }
}

/// Exact result of `a op b`; nullopt for division by zero.
inline std::optional<Rational> apply_op(Op op, const Rational& a, const Rational& b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div:
      if (b == Rational(0)) return std::nullopt;
      return a / b;
  }
  return std::nullopt;
}

/// Immutable arithmetic expression tree over puzzle inputs. Nodes are shared,
/// so copies are cheap. Text form fully parenthesises every non-leaf operand:
/// "(10-4)*(13-9)". Fractional leaves print as "[n/d]".
class Expr {
 public:
  static Expr leaf(const Rational& value) {
    auto n = std::make_shared<Node>();
    n->value = value;
    n->text = value.denominator() == 1
                  ? std::to_string(value.numerator())
                  : "[" + std::to_string(value.numerator()) + "/" +
                        std::to_string(value.denominator()) + "]";
    n->leaf_count = 1;
    return Expr(std::move(n));
  }

  static Expr combine(const Expr& lhs, Op op, const Expr& rhs) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = lhs.node_;
    n->rhs = rhs.node_;
    if (lhs.node_->value && rhs.node_->value) n->value = apply_op(op, *lhs.node_->value, *rhs.node_->value);
    n->text = lhs.wrapped() + op_symbol(op) + rhs.wrapped();
    n->leaf_count = lhs.node_->leaf_count + rhs.node_->leaf_count;
    return Expr(std::move(n));
  }

  /// Recursive-descent parser for the usual infix grammar; accepts the
  /// output of text() and ordinary hand-written input.
  static Expr parse(std::string_view text) {
    Parser p{text, 0};
    Expr e = p.expression();
    p.skip_ws();
    if (p.pos != text.size()) throw ParseError("trailing input in expression: " + std::string(text));
    return e;
  }

  bool is_leaf() const { return !node_->lhs; }
  const std::string& text() const { return node_->text; }
  std::size_t leaf_count() const { return node_->leaf_count; }

  /// Exact value; nullopt if any division by zero occurs.
  std::optional<Rational> evaluate() const { return node_->value; }

  std::vector<Rational> leaves() const {
    std::vector<Rational> out;
    collect(node_.get(), out);
    return out;
  }

  friend bool operator==(const Expr& a, const Expr& b) { return a.text() == b.text(); }

 private:
  struct Node {
    std::optional<Rational> value;
    Op op = Op::Add;
    std::shared_ptr<const Node> lhs, rhs;
    std::string text;
    std::size_t leaf_count = 0;
  };

  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::string wrapped() const { return is_leaf() ? node_->text : "(" + node_->text + ")"; }

  static void collect(const Node* n, std::vector<Rational>& out) {
    if (!n->lhs) {
      out.push_back(*n->value);
      return;
    }
    collect(n->lhs.get(), out);
    collect(n->rhs.get(), out);
  }

  struct Parser {
    std::string_view s;
    std::size_t pos;

    void skip_ws() {
      while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }

    [[noreturn]] void fail(const char* what) const {
      throw ParseError(std::string(what) + " at offset " + std::to_string(pos) + " in '" +
                       std::string(s) + "'");
    }

    Expr expression() {
      Expr lhs = term();
      for (;;) {
        skip_ws();
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
          Op op = *op_from_char(s[pos++]);
          lhs = combine(lhs, op, term());
        } else {
          return lhs;
        }
      }
    }

    Expr term() {
      Expr lhs = factor();
      for (;;) {
        skip_ws();
        if (pos < s.size() && (s[pos] == '*' || s[pos] == '/')) {
          Op op = *op_from_char(s[pos++]);
          lhs = combine(lhs, op, factor());
        } else {
          return lhs;
        }
      }
    }

    Expr factor() {
      skip_ws();
      if (pos >= s.size()) fail("unexpected end of expression");
      if (s[pos] == '(') {
        ++pos;
        Expr e = expression();
        skip_ws();
        if (pos >= s.size() || s[pos] != ')') fail("expected ')'");
        ++pos;
        return e;
      }
      if (s[pos] == '[') {
        auto close = s.find(']', pos);
        if (close == std::string_view::npos) fail("expected ']'");
        auto value = parse_number(s.substr(pos + 1, close - pos - 1));
        if (!value) fail("bad fraction literal");
        pos = close + 1;
        return leaf(*value);
      }
      std::size_t start = pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
      if (start == pos) fail("expected number");
      auto v = parse_int(s.substr(start, pos - start));
      if (!v) fail("number out of range");
      return leaf(Rational(*v));
    }
  };

  std::shared_ptr<const Node> node_;
};

}  // namespace vgd
