#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "kahler/expr.hpp"
#include "support.hpp"

using kahler::complex;
using kahler::Jet;
namespace dsl = kahler::dsl;

namespace {

complex eval(const std::string& text, std::vector<complex> env = {}) {
  return dsl::evaluate<complex>(dsl::parse(text), env);
}

// Literals are restricted to the forms the parser produces: real or purely
// imaginary.
dsl::Expr random_ast(kahler::Rng& rng, int depth, int num_vars) {
  const auto pick = [&](int n) { return static_cast<int>(rng.next() % n); };
  if (depth == 0 || pick(4) == 0) {
    if (pick(2) == 0) return dsl::variable(pick(num_vars));
    const double x = std::round(rng.uniform(-4.0, 4.0) * 8.0) / 8.0;
    return dsl::literal(pick(3) == 0 ? complex(0.0, x) : complex(x, 0.0));
  }
  switch (pick(9)) {
    case 0: return dsl::unary(dsl::UnaryOp::Neg, random_ast(rng, depth - 1, num_vars));
    case 1: return dsl::unary(dsl::UnaryOp::Conj, random_ast(rng, depth - 1, num_vars));
    case 2: return dsl::unary(dsl::UnaryOp::Exp, random_ast(rng, depth - 1, num_vars));
    case 3: return dsl::unary(dsl::UnaryOp::Log, random_ast(rng, depth - 1, num_vars));
    default: break;
  }
  const dsl::BinaryOp op = static_cast<dsl::BinaryOp>(pick(5));
  dsl::Expr rhs = op == dsl::BinaryOp::Pow && pick(2) == 0
                      ? dsl::literal(static_cast<double>(pick(7) - 3))
                      : random_ast(rng, depth - 1, num_vars);
  return dsl::binary(op, random_ast(rng, depth - 1, num_vars), rhs);
}

// Keeps trees away from the branch cut, zeros of divisors and overflow, where
// the two evaluation routes may legitimately differ by more than rounding.
bool well_conditioned(const dsl::Expr& e, std::span<const complex> env) {
  const auto value = [&](const dsl::Expr& x) { return dsl::evaluate<complex>(x, env); };
  const complex here = value(e);
  if (!std::isfinite(here.real()) || !std::isfinite(here.imag()) || std::abs(here) > 1e3)
    return false;
  return std::visit(
      [&](const auto& node) -> bool {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, dsl::Unary>) {
          if (node.op == dsl::UnaryOp::Log) {
            const complex a = value(node.arg);
            if (std::abs(a) < 0.1 || (a.real() < 0.0 && std::abs(a.imag()) < 0.1)) return false;
          }
          return well_conditioned(node.arg, env);
        } else if constexpr (std::is_same_v<T, dsl::Binary>) {
          if (node.op == dsl::BinaryOp::Div && std::abs(value(node.rhs)) < 0.1) return false;
          if (node.op == dsl::BinaryOp::Pow) {
            const complex a = value(node.lhs);
            if (std::abs(a) < 0.1 || (a.real() < 0.0 && std::abs(a.imag()) < 0.1)) return false;
          }
          return well_conditioned(node.lhs, env) && well_conditioned(node.rhs, env);
        } else {
          return true;
        }
      },
      e->value);
}

}  // namespace

TEST_CASE("parse builds the expected tree") {
  using dsl::BinaryOp;
  const auto z = dsl::variable(0);
  const auto want = dsl::binary(
      BinaryOp::Pow,
      dsl::binary(BinaryOp::Sub, dsl::literal(1.0),
                  dsl::binary(BinaryOp::Mul, z, dsl::unary(dsl::UnaryOp::Conj, z))),
      dsl::literal(-2.0));
  CHECK(dsl::structurally_equal(dsl::parse("(1 - z1*conj(z1))^-2"), want));
  CHECK_FALSE(dsl::structurally_equal(dsl::parse("(1 - z1*conj(z1))^-3"), want));
  CHECK(dsl::max_variable(want) == 0);
  CHECK(dsl::max_variable(dsl::parse("z3 + z1")) == 2);
  CHECK(dsl::max_variable(dsl::parse("2*i")) == -1);
}

TEST_CASE("syntax errors carry the offset") {
  try {
    dsl::parse("1 +* z1");
    FAIL("expected a parse error");
  } catch (const dsl::ParseError& e) {
    CHECK(e.offset() == 3);
    CHECK(std::string(e.what()).find("offset 3") != std::string::npos);
    CHECK_FALSE(e.expected().empty());
  }
  CHECK_THROWS_AS(dsl::parse("z0"), dsl::ParseError);
  CHECK_THROWS_AS(dsl::parse("sin(z1)"), dsl::ParseError);
  CHECK_THROWS_AS(dsl::parse("(z1"), dsl::ParseError);
  CHECK_THROWS_AS(dsl::parse(""), dsl::ParseError);
  CHECK_THROWS_AS(dsl::parse("z1 z2"), dsl::ParseError);
  CHECK_THROWS_AS(dsl::parse("3 # 4"), dsl::ParseError);
}

TEST_CASE("evaluation and precedence") {
  CHECK(eval("i*i") == complex(-1.0, 0.0));
  CHECK(eval("-2^2") == complex(-4.0));
  CHECK(eval("2^3^2") == complex(512.0));
  CHECK(eval("8/2/2") == complex(2.0));
  CHECK(eval("1-2-3") == complex(-4.0));
  CHECK(eval("2*3i") == complex(0.0, 6.0));
  CHECK(eval("conj(z1)", {complex(0.3, 0.2)}) == complex(0.3, -0.2));
  CHECK(std::abs(eval("exp(log(z1))", {complex(0.4, -1.0)}) - complex(0.4, -1.0)) < 1e-15);
  CHECK(std::abs(eval("z1^0.5", {4.0}) - 2.0) < 1e-15);
  CHECK(std::abs(eval("1.5e2 + 2.5E-1")  - 150.25) < 1e-13);
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(eval("z2", {1.0}), dsl::EvalError);
  CHECK_THROWS_AS(eval("log(0)"), kahler::DomainError);
  CHECK_THROWS_AS(eval("1/(z1 - z1)", {2.0}), kahler::DomainError);
  CHECK_THROWS_AS(eval("0^-1"), kahler::DomainError);
  const std::vector<Jet> zero{Jet::constant(0.0, 2, 1)};
  CHECK_THROWS_AS(dsl::evaluate<Jet>(dsl::parse("log(z1)"), zero), kahler::DomainError);
}

TEST_CASE("jet evaluation carries derivatives") {
  const std::vector<Jet> env{kahler::complex_variable(0, 0.0, 2, 4)};
  const Jet f = dsl::evaluate<Jet>(dsl::parse("(1 - z1*conj(z1))^-2"), env);
  const std::array<int, 1> one{1};
  CHECK(std::abs(f.value() - 1.0) < 1e-15);
  CHECK(std::abs(kahler::wirtinger(f, one, one) - 2.0) < 1e-14);

  const std::vector<Jet> at{kahler::complex_variable(0, 0.4, 2, 3)};
  const Jet a = dsl::evaluate<Jet>(dsl::parse("exp(log(1 + z1))"), at);
  const Jet b = dsl::evaluate<Jet>(dsl::parse("1 + z1"), at);
  for (std::size_t k = 0; k < a.coeffs().size(); ++k)
    CHECK(std::abs(a.coeffs()[k] - b.coeffs()[k]) < 1e-12);
}

TEST_CASE("print then parse gives the same tree") {
  kahler::Rng rng(101);
  for (int trial = 0; trial < 500; ++trial) {
    const auto e = random_ast(rng, 1 + static_cast<int>(rng.next() % 6), 3);
    const std::string text = dsl::to_string(e);
    INFO(text);
    CHECK(dsl::structurally_equal(dsl::parse(text), e));
  }
  CHECK(dsl::to_string(dsl::parse("-2.5i")) == "(-2.5i)");
  CHECK(dsl::to_string(dsl::parse("-(z1)^2")) == "(-((z1 ^ 2.0)))");
  CHECK(std::abs(eval(dsl::to_string(dsl::literal(complex(1.5, -0.25)))) - complex(1.5, -0.25)) ==
        0.0);
}

TEST_CASE("degree-0 jet evaluation equals complex evaluation") {
  kahler::Rng rng(77);
  int accepted = 0;
  for (int trial = 0; accepted < 100 && trial < 100000; ++trial) {
    const auto e = random_ast(rng, 1 + static_cast<int>(rng.next() % 6), 2);
    std::vector<complex> env{test::random_complex(rng) + 1.5, test::random_complex(rng) - 1.5};
    try {
      if (!well_conditioned(e, env)) continue;
    } catch (const kahler::DomainError&) {
      continue;
    }
    const complex want = dsl::evaluate<complex>(e, env);
    std::vector<Jet> jets;
    for (int c = 0; c < 2; ++c) jets.push_back(kahler::complex_variable(c, env[c], 4, 0));
    const Jet got = dsl::evaluate<Jet>(e, jets);
    INFO(dsl::to_string(e));
    CHECK(std::abs(got.value() - want) <= 1e-13 * std::max(1.0, std::abs(want)));
    ++accepted;
  }
  CHECK(accepted == 100);
}

TEST_CASE("parser only ever raises ParseError on arbitrary bytes") {
  kahler::Rng rng(13);
  const std::string alphabet = "z19i()+-*/^.eE conjexplg0123456789\t\n#$\x01\xff";
  for (int trial = 0; trial < 20000; ++trial) {
    std::string s;
    const int len = static_cast<int>(rng.next() % 24);
    for (int k = 0; k < len; ++k)
      s += rng.next() % 8 == 0 ? static_cast<char>(rng.next() % 256)
                               : alphabet[rng.next() % alphabet.size()];
    try {
      dsl::parse(s);
    } catch (const dsl::ParseError& e) {
      CHECK(e.offset() <= s.size());
    } catch (...) {
      FAIL("non-ParseError exception for input of length " << s.size());
    }
  }
}
