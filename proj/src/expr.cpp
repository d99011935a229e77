#include "kahler/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace kahler::dsl {

Expr literal(complex value) { return std::make_shared<const Node>(Node{Literal{value}}); }
Expr variable(int index) { return std::make_shared<const Node>(Node{Variable{index}}); }
Expr unary(UnaryOp op, Expr arg) {
  return std::make_shared<const Node>(Node{Unary{op, std::move(arg)}});
}
Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
  return std::make_shared<const Node>(Node{Binary{op, std::move(lhs), std::move(rhs)}});
}

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string_view text;
  complex number{};
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    default: return "'" + std::string(t.text) + "'";
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) { advance(); }

  Expr parse_all() {
    Expr e = parse_expr();
    if (tok_.kind != Tok::End) fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
    return e;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected) {
    std::string msg = "syntax error at offset " + std::to_string(tok_.offset) + ": unexpected " +
                      describe(tok_) + ", expected one of:";
    for (const auto& e : expected) msg += " " + e;
    throw ParseError(msg, tok_.offset, std::move(expected));
  }

  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) {
      tok_ = {Tok::End, start, {}};
      return;
    }
    const char c = src_[pos_];
    auto single = [&](Tok kind) {
      ++pos_;
      tok_ = {kind, start, src_.substr(start, 1)};
    };
    switch (c) {
      case '+': return single(Tok::Plus);
      case '-': return single(Tok::Minus);
      case '*': return single(Tok::Star);
      case '/': return single(Tok::Slash);
      case '^': return single(Tok::Caret);
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number(start);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      tok_ = {Tok::Ident, start, src_.substr(start, pos_ - start)};
      return;
    }
    tok_ = {Tok::End, start, src_.substr(start, 1)};
    throw ParseError("syntax error at offset " + std::to_string(start) + ": invalid character",
                     start, {"number", "identifier", "'('", "'-'"});
  }

  void lex_number(std::size_t start) {
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t count = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) {
      tok_ = {Tok::End, start, src_.substr(start, 1)};
      throw ParseError("syntax error at offset " + std::to_string(start) + ": malformed number",
                       start, {"digit"});
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        digits();
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    const double value = std::strtod(text.c_str(), nullptr);
    complex number{value, 0.0};
    if (pos_ < src_.size() && src_[pos_] == 'i' &&
        !(pos_ + 1 < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_ + 1])))) {
      ++pos_;
      number = {0.0, value};
    }
    tok_ = {Tok::Number, start, src_.substr(start, pos_ - start), number};
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      const BinaryOp op = tok_.kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
      advance();
      lhs = binary(op, lhs, parse_term());
    }
    return lhs;
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      const BinaryOp op = tok_.kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
      advance();
      lhs = binary(op, lhs, parse_unary());
    }
    return lhs;
  }

  Expr parse_unary() {
    if (tok_.kind == Tok::Minus) {
      advance();
      if (tok_.kind == Tok::Number) {
        const complex value = tok_.number;
        advance();
        // pow binds tighter than negation: -2^2 is -(2^2).
        if (tok_.kind == Tok::Caret) return unary(UnaryOp::Neg, parse_power_tail(literal(value)));
        return literal(-value);
      }
      return unary(UnaryOp::Neg, parse_unary());
    }
    return parse_power_tail(parse_primary());
  }

  Expr parse_power_tail(Expr base) {
    if (tok_.kind != Tok::Caret) return base;
    advance();
    return binary(BinaryOp::Pow, base, parse_unary());
  }

  Expr parse_primary() {
    switch (tok_.kind) {
      case Tok::Number: {
        Expr e = literal(tok_.number);
        advance();
        return e;
      }
      case Tok::LParen: {
        advance();
        Expr e = parse_expr();
        if (tok_.kind != Tok::RParen) fail({"')'", "'+'", "'-'", "'*'", "'/'", "'^'"});
        advance();
        return e;
      }
      case Tok::Ident: return parse_identifier();
      default: fail({"number", "identifier", "'('", "'-'"});
    }
  }

  Expr parse_identifier() {
    const Token t = tok_;
    const std::string_view name = t.text;
    if (name == "i") {
      advance();
      return literal({0.0, 1.0});
    }
    if (name.size() == 2 && name[0] == 'z' && name[1] >= '1' && name[1] <= '9') {
      advance();
      return variable(name[1] - '1');
    }
    UnaryOp op;
    if (name == "conj") op = UnaryOp::Conj;
    else if (name == "exp") op = UnaryOp::Exp;
    else if (name == "log") op = UnaryOp::Log;
    else
      throw ParseError("unknown identifier '" + std::string(name) + "' at offset " +
                           std::to_string(t.offset),
                       t.offset, {"z1..z9", "i", "conj", "exp", "log"});
    advance();
    if (tok_.kind != Tok::LParen) fail({"'('"});
    advance();
    Expr arg = parse_expr();
    if (tok_.kind != Tok::RParen) fail({"')'"});
    advance();
    return unary(op, arg);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_{Tok::End, 0, {}};
};

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

std::string to_string(const Expr& e) {
  return std::visit(
      [](const auto& node) -> std::string {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Literal>) {
          const complex v = node.value;
          // Only the parser's own literals round-trip; a general complex
          // constant prints as a sum and reparses as one.
          if (v.real() != 0.0 && v.imag() != 0.0)
            return "(" + to_string(literal(v.real())) + " + " + to_string(literal(complex(0, v.imag()))) + ")";
          std::string body = v.imag() == 0.0 ? format_real(std::abs(v.real()))
                                             : format_real(std::abs(v.imag())) + "i";
          const bool negative = v.imag() == 0.0 ? std::signbit(v.real()) : std::signbit(v.imag());
          return negative ? "(-" + body + ")" : body;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return "z" + std::to_string(node.index + 1);
        } else if constexpr (std::is_same_v<T, Unary>) {
          const std::string arg = to_string(node.arg);
          switch (node.op) {
            case UnaryOp::Neg: return "(-(" + arg + "))";
            case UnaryOp::Conj: return "conj(" + arg + ")";
            case UnaryOp::Exp: return "exp(" + arg + ")";
            case UnaryOp::Log: return "log(" + arg + ")";
          }
          return {};
        } else {
          static constexpr const char* symbols[] = {" + ", " - ", " * ", " / ", " ^ "};
          return "(" + to_string(node.lhs) + symbols[static_cast<int>(node.op)] +
                 to_string(node.rhs) + ")";
        }
      },
      e->value);
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a->value.index() != b->value.index()) return false;
  return std::visit(
      [&](const auto& lhs) -> bool {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(b->value);
        if constexpr (std::is_same_v<T, Literal>) {
          return lhs.value == rhs.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return lhs.index == rhs.index;
        } else if constexpr (std::is_same_v<T, Unary>) {
          return lhs.op == rhs.op && structurally_equal(lhs.arg, rhs.arg);
        } else {
          return lhs.op == rhs.op && structurally_equal(lhs.lhs, rhs.lhs) &&
                 structurally_equal(lhs.rhs, rhs.rhs);
        }
      },
      a->value);
}

int max_variable(const Expr& e) {
  return std::visit(
      [](const auto& node) -> int {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Literal>) return -1;
        else if constexpr (std::is_same_v<T, Variable>) return node.index;
        else if constexpr (std::is_same_v<T, Unary>) return max_variable(node.arg);
        else return std::max(max_variable(node.lhs), max_variable(node.rhs));
      },
      e->value);
}

namespace detail {

bool constant_value(const Expr& e, complex& out) {
  if (max_variable(e) >= 0) return false;
  out = evaluate<complex>(e, {});
  return true;
}

bool integral_exponent(const Expr& e, int& out) {
  complex p;
  if (!constant_value(e, p)) return false;
  if (p.imag() != 0.0 || p.real() != std::round(p.real()) || std::abs(p.real()) > 1 << 20)
    return false;
  out = static_cast<int>(p.real());
  return true;
}

}  // namespace detail

}  // namespace kahler::dsl
