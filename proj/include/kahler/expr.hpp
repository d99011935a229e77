#pragma once

// Closed-form metric expressions in z1..z9 and their conjugates.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?            right associative
//   primary := number ['i'] | 'i' | zN | func '(' expr ')' | '(' expr ')'
//   func    := conj | exp | log
//
// A minus sign written directly in front of a number literal folds into the
// literal, so "-2" is one node while "-(2)" is a negation.

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kahler/errors.hpp"
#include "kahler/jet.hpp"

namespace kahler::dsl {

enum class UnaryOp { Neg, Conj, Exp, Log };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Literal {
  complex value;
};
struct Variable {
  int index;  // 0-based: z1 is 0
};
struct Unary {
  UnaryOp op;
  Expr arg;
};
struct Binary {
  BinaryOp op;
  Expr lhs;
  Expr rhs;
};

struct Node {
  std::variant<Literal, Variable, Unary, Binary> value;
};

Expr literal(complex value);
Expr variable(int index);
Expr unary(UnaryOp op, Expr arg);
Expr binary(BinaryOp op, Expr lhs, Expr rhs);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::size_t offset, std::vector<std::string> expected)
      : std::runtime_error(std::move(message)), offset_(offset), expected_(std::move(expected)) {}

  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Expr parse(std::string_view text);
std::string to_string(const Expr& e);
bool structurally_equal(const Expr& a, const Expr& b);
/// Largest variable index used, or -1 for a constant expression.
int max_variable(const Expr& e);

namespace detail {

inline complex dsl_conj(const complex& x) { return std::conj(x); }
inline complex dsl_exp(const complex& x) { return std::exp(x); }
inline complex dsl_log(const complex& x) {
  if (x == complex{}) throw DomainError("log of zero");
  return std::log(x);
}
inline complex dsl_div(const complex& a, const complex& b) {
  if (b == complex{}) throw DomainError("division by zero");
  return a / b;
}
inline complex dsl_pow_int(const complex& x, int n) {
  if (n < 0) {
    if (x == complex{}) throw DomainError("negative power of zero");
    return dsl_pow_int(1.0 / x, -n);
  }
  complex result = 1.0;
  complex base = x;
  for (unsigned e = static_cast<unsigned>(n); e != 0; e >>= 1) {
    if (e & 1u) result *= base;
    base *= base;
  }
  return result;
}
inline complex dsl_pow(const complex& x, const complex& p) {
  if (x == complex{}) throw DomainError("non-integer power of zero");
  return std::exp(p * std::log(x));
}

inline Jet dsl_conj(const Jet& x) { return conj(x); }
inline Jet dsl_exp(const Jet& x) { return exp(x); }
inline Jet dsl_log(const Jet& x) { return log(x); }
inline Jet dsl_div(const Jet& a, const Jet& b) { return a / b; }
inline Jet dsl_pow_int(const Jet& x, int n) { return pow(x, n); }
inline Jet dsl_pow(const Jet& x, const complex& p) { return pow(x, p); }

/// Integer exponent when `e` is a real literal with integral value.
bool integral_exponent(const Expr& e, int& out);
bool constant_value(const Expr& e, complex& out);

}  // namespace detail

/// Evaluates over complex numbers or jets. env[k] binds z_{k+1}.
template <typename Scalar>
Scalar evaluate(const Expr& e, std::span<const Scalar> env) {
  using namespace detail;
  return std::visit(
      [&](const auto& node) -> Scalar {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return Scalar(node.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          if (node.index < 0 || static_cast<std::size_t>(node.index) >= env.size())
            throw EvalError("unbound variable z" + std::to_string(node.index + 1));
          return env[node.index];
        } else if constexpr (std::is_same_v<T, Unary>) {
          Scalar a = evaluate(node.arg, env);
          switch (node.op) {
            case UnaryOp::Neg: return -a;
            case UnaryOp::Conj: return dsl_conj(a);
            case UnaryOp::Exp: return dsl_exp(a);
            case UnaryOp::Log: return dsl_log(a);
          }
          throw EvalError("bad unary operator");
        } else {
          if (node.op == BinaryOp::Pow) {
            Scalar base = evaluate(node.lhs, env);
            int n = 0;
            if (integral_exponent(node.rhs, n)) return dsl_pow_int(base, n);
            complex p;
            if (constant_value(node.rhs, p)) return dsl_pow(base, p);
            return dsl_exp(evaluate(node.rhs, env) * dsl_log(base));
          }
          Scalar a = evaluate(node.lhs, env);
          Scalar b = evaluate(node.rhs, env);
          switch (node.op) {
            case BinaryOp::Add: return a + b;
            case BinaryOp::Sub: return a - b;
            case BinaryOp::Mul: return a * b;
            case BinaryOp::Div: return dsl_div(a, b);
            case BinaryOp::Pow: break;
          }
          throw EvalError("bad binary operator");
        }
      },
      e->value);
}

}  // namespace kahler::dsl
