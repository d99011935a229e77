#pragma once

// Truncated multivariate Taylor expansions ("jets") over real coordinates
// with complex coefficients. Every derivative the engine needs is read off
// a jet; there are no finite differences anywhere in the library.
//
// Coefficients are stored densely in graded lexicographic order: all
// monomials of total degree 0, then degree 1, ..., and within one degree
// lexicographically with the first variable's exponent largest first.
// A jet of degree D in N variables holds C(N + D, D) coefficients.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace kahler {

using complex = std::complex<double>;

/// Monomial table shared by every jet with the same (num_vars, degree).
class JetLayout {
 public:
  struct ProductTerm {
    std::uint32_t rhs;
    std::uint32_t out;
  };
  struct DerivativeTerm {
    std::uint32_t src;
    std::uint32_t dst;
    double factor;
  };

  /// Interned layout; thread-safe, layouts are immutable once built.
  static std::shared_ptr<const JetLayout> get(int num_vars, int degree);

  int num_vars() const { return num_vars_; }
  int degree() const { return degree_; }
  std::size_t size() const { return degrees_.size(); }

  std::span<const std::uint8_t> exponents(std::size_t k) const {
    return {exponents_.data() + k * num_vars_, static_cast<std::size_t>(num_vars_)};
  }
  int total_degree(std::size_t k) const { return degrees_[k]; }

  /// Number of monomials of total degree <= d.
  std::size_t prefix_size(int d) const;

  /// Position of a multi-index; throws std::out_of_range if absent.
  std::size_t index_of(std::span<const int> exps) const;

  /// For monomial `lhs`, every monomial `rhs` with deg(lhs) + deg(rhs) <=
  /// degree() and the position of their product.
  std::span<const ProductTerm> product_terms(std::size_t lhs) const {
    return {product_terms_.data() + product_offsets_[lhs],
            product_offsets_[lhs + 1] - product_offsets_[lhs]};
  }

  /// d/dx_var maps coefficient `src` (this layout) onto `dst` in the
  /// layout of degree - 1, scaled by `factor`.
  std::span<const DerivativeTerm> derivative_terms(int var) const {
    return derivative_terms_[var];
  }

  JetLayout(int num_vars, int degree);

 private:
  int num_vars_;
  int degree_;
  std::vector<std::uint8_t> exponents_;
  std::vector<int> degrees_;
  std::vector<std::size_t> prefix_;
  std::vector<std::size_t> product_offsets_;
  std::vector<ProductTerm> product_terms_;
  std::vector<std::vector<DerivativeTerm>> derivative_terms_;
};

/// Number of coefficients of a jet in `num_vars` variables of `degree`.
std::size_t jet_size(int num_vars, int degree);

class Jet {
 public:
  /// Layout-free constant; combines with any jet.
  Jet() : coeffs_{complex{}} {}
  Jet(double value) : coeffs_{complex{value}} {}  // NOLINT: implicit on purpose
  Jet(complex value) : coeffs_{value} {}          // NOLINT

  /// Coordinate function x_index expanded at `base_value`.
  static Jet variable(int index, complex base_value, int num_vars, int degree);
  static Jet constant(complex value, int num_vars, int degree);
  static Jet from_coefficients(std::shared_ptr<const JetLayout> layout,
                               std::vector<complex> coeffs);

  bool has_layout() const { return layout_ != nullptr; }
  const std::shared_ptr<const JetLayout>& layout() const { return layout_; }
  int num_vars() const { return layout_ ? layout_->num_vars() : 0; }
  int degree() const { return layout_ ? layout_->degree() : 0; }

  complex value() const { return coeffs_[0]; }
  std::span<const complex> coeffs() const { return coeffs_; }
  std::span<complex> coeffs() { return coeffs_; }
  /// Coefficient of the monomial with the given exponents (zero when the
  /// monomial is beyond the truncation degree).
  complex coeff(std::span<const int> exps) const;

  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator*=(const Jet& rhs);
  Jet& operator/=(const Jet& rhs);

  friend Jet operator+(Jet lhs, const Jet& rhs) { return lhs += rhs; }
  friend Jet operator-(Jet lhs, const Jet& rhs) { return lhs -= rhs; }
  friend Jet operator*(const Jet& lhs, const Jet& rhs);
  friend Jet operator/(Jet lhs, const Jet& rhs) { return lhs /= rhs; }
  friend Jet operator-(Jet x);
  friend bool operator==(const Jet& a, const Jet& b);

 private:
  std::shared_ptr<const JetLayout> layout_;
  std::vector<complex> coeffs_;
};

/// Complex coordinate z = x_{2c} + i x_{2c+1} expanded at `base`.
Jet complex_variable(int c, complex base, int num_vars, int degree);

Jet truncate(const Jet& x, int degree);
Jet conj(const Jet& x);
Jet reciprocal(const Jet& x);
Jet exp(const Jet& x);
Jet log(const Jet& x);
/// Exact repeated squaring; negative powers go through reciprocal.
Jet pow(const Jet& x, int exponent);
/// Principal branch binomial series.
Jet pow(const Jet& x, complex exponent);

/// Partial derivative with respect to real variable `var`; degree drops by one.
Jet derivative(const Jet& x, int var);
/// d/dz_c = (d/dx - i d/dy) / 2 on complex coordinate c.
Jet d_holo(const Jet& x, int c);
/// d/dz̄_c = (d/dx + i d/dy) / 2.
Jet d_antiholo(const Jet& x, int c);

/// Mixed Wirtinger derivative at the expansion point. `holo[c]` and
/// `antiholo[c]` give the order in z_c and z̄_c. Throws std::domain_error if
/// the total order exceeds the jet degree.
complex wirtinger(const Jet& f, std::span<const int> holo, std::span<const int> antiholo);

}  // namespace kahler

namespace Eigen {

template <>
struct NumTraits<kahler::Jet> : GenericNumTraits<kahler::Jet> {
  using Real = kahler::Jet;
  using NonInteger = kahler::Jet;
  using Nested = kahler::Jet;
  using Literal = kahler::Jet;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 20,
    MulCost = 200
  };
  static inline Real epsilon() { return Real(NumTraits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(1e-12); }
  static inline int digits10() { return NumTraits<double>::digits10(); }
};

}  // namespace Eigen
