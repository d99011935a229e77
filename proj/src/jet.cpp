#include "kahler/jet.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

#include "kahler/errors.hpp"

namespace kahler {

namespace {

void append_monomials(int num_vars, int remaining, int var, std::vector<std::uint8_t>& current,
                      std::vector<std::uint8_t>& out) {
  if (var == num_vars - 1) {
    current[var] = static_cast<std::uint8_t>(remaining);
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[var] = static_cast<std::uint8_t>(e);
    append_monomials(num_vars, remaining - e, var + 1, current, out);
  }
  current[var] = 0;
}

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t result = 1;
  for (int i = 1; i <= k; ++i) result = result * static_cast<std::size_t>(n - k + i) / i;
  return result;
}

}  // namespace

std::size_t jet_size(int num_vars, int degree) { return binomial(num_vars + degree, degree); }

JetLayout::JetLayout(int num_vars, int degree) : num_vars_(num_vars), degree_(degree) {
  if (num_vars < 1 || degree < 0 || degree > 12)
    throw std::invalid_argument("jet layout: unsupported dimensions");

  std::vector<std::uint8_t> current(num_vars, 0);
  prefix_.push_back(0);
  for (int d = 0; d <= degree; ++d) {
    append_monomials(num_vars, d, 0, current, exponents_);
    const std::size_t count = exponents_.size() / num_vars;
    degrees_.resize(count, d);
    prefix_.push_back(count);
  }

  std::map<std::vector<std::uint8_t>, std::uint32_t> position;
  for (std::size_t k = 0; k < size(); ++k) {
    auto e = exponents(k);
    position.emplace(std::vector<std::uint8_t>(e.begin(), e.end()), static_cast<std::uint32_t>(k));
  }

  std::vector<std::uint8_t> sum(num_vars);
  product_offsets_.push_back(0);
  for (std::size_t i = 0; i < size(); ++i) {
    const std::size_t limit = prefix_[degree - degrees_[i] + 1];
    for (std::size_t j = 0; j < limit; ++j) {
      auto a = exponents(i);
      auto b = exponents(j);
      for (int v = 0; v < num_vars; ++v) sum[v] = static_cast<std::uint8_t>(a[v] + b[v]);
      product_terms_.push_back({static_cast<std::uint32_t>(j), position.at(sum)});
    }
    product_offsets_.push_back(product_terms_.size());
  }

  // Derivative targets index into the degree - 1 layout, which is exactly
  // the prefix of this one, so positions can be shared.
  derivative_terms_.resize(num_vars);
  if (degree > 0) {
    std::vector<std::uint8_t> lowered(num_vars);
    for (int var = 0; var < num_vars; ++var) {
      for (std::size_t k = 0; k < size(); ++k) {
        auto e = exponents(k);
        if (e[var] == 0) continue;
        std::copy(e.begin(), e.end(), lowered.begin());
        lowered[var] -= 1;
        derivative_terms_[var].push_back(
            {static_cast<std::uint32_t>(k), position.at(lowered), static_cast<double>(e[var])});
      }
    }
  }
}

std::shared_ptr<const JetLayout> JetLayout::get(int num_vars, int degree) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> registry;
  std::lock_guard lock(mutex);
  auto& slot = registry[{num_vars, degree}];
  if (!slot) slot = std::make_shared<const JetLayout>(num_vars, degree);
  return slot;
}

std::size_t JetLayout::prefix_size(int d) const {
  if (d < 0) return 0;
  return prefix_[std::min(d, degree_) + 1];
}

std::size_t JetLayout::index_of(std::span<const int> exps) const {
  if (static_cast<int>(exps.size()) != num_vars_) throw std::out_of_range("multi-index arity");
  int total = 0;
  for (int e : exps) {
    if (e < 0) throw std::out_of_range("negative exponent");
    total += e;
  }
  if (total > degree_) throw std::out_of_range("multi-index beyond truncation degree");
  for (std::size_t k = prefix_[total]; k < prefix_[total + 1]; ++k) {
    auto e = exponents(k);
    if (std::equal(e.begin(), e.end(), exps.begin(), exps.end(),
                   [](std::uint8_t a, int b) { return a == b; }))
      return k;
  }
  throw std::out_of_range("multi-index not found");
}

Jet Jet::variable(int index, complex base_value, int num_vars, int degree) {
  if (index < 0 || index >= num_vars)
    throw std::out_of_range("jet variable index " + std::to_string(index) + " out of range");
  Jet x = constant(base_value, num_vars, degree);
  if (degree >= 1) x.coeffs_[1 + index] = 1.0;
  return x;
}

Jet Jet::constant(complex value, int num_vars, int degree) {
  Jet x;
  x.layout_ = JetLayout::get(num_vars, degree);
  x.coeffs_.assign(x.layout_->size(), complex{});
  x.coeffs_[0] = value;
  return x;
}

Jet Jet::from_coefficients(std::shared_ptr<const JetLayout> layout, std::vector<complex> coeffs) {
  if (!layout || coeffs.size() != layout->size())
    throw std::invalid_argument("jet coefficient count does not match layout");
  Jet x;
  x.layout_ = std::move(layout);
  x.coeffs_ = std::move(coeffs);
  return x;
}

complex Jet::coeff(std::span<const int> exps) const {
  if (!layout_) {
    for (int e : exps)
      if (e != 0) return {};
    return coeffs_[0];
  }
  int total = 0;
  for (int e : exps) total += e;
  if (total > layout_->degree()) return {};
  return coeffs_[layout_->index_of(exps)];
}

Jet truncate(const Jet& x, int degree) {
  if (!x.has_layout() || x.degree() <= degree) return x;
  auto layout = JetLayout::get(x.num_vars(), degree);
  std::vector<complex> c(x.coeffs().begin(), x.coeffs().begin() + layout->size());
  return Jet::from_coefficients(std::move(layout), std::move(c));
}

namespace {

// Brings two operands to a common layout (lower degree wins).
void harmonize(Jet& lhs, const Jet& rhs, Jet& rhs_out) {
  rhs_out = rhs;
  if (!lhs.has_layout() || !rhs.has_layout()) return;
  if (lhs.num_vars() != rhs.num_vars())
    throw std::invalid_argument("jets over different variable counts");
  if (lhs.degree() > rhs.degree()) lhs = truncate(lhs, rhs.degree());
  if (rhs.degree() > lhs.degree()) rhs_out = truncate(rhs, lhs.degree());
}

}  // namespace

Jet& Jet::operator+=(const Jet& rhs) {
  if (!rhs.has_layout()) {
    coeffs_[0] += rhs.coeffs_[0];
    return *this;
  }
  if (!has_layout()) {
    const complex c = coeffs_[0];
    *this = rhs;
    coeffs_[0] += c;
    return *this;
  }
  Jet r;
  harmonize(*this, rhs, r);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += r.coeffs_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) { return *this += -rhs; }

Jet operator-(Jet x) {
  for (auto& c : x.coeffs_) c = -c;
  return x;
}

Jet operator*(const Jet& lhs, const Jet& rhs) {
  if (!rhs.has_layout()) {
    Jet out = lhs;
    for (auto& c : out.coeffs_) c *= rhs.coeffs_[0];
    return out;
  }
  if (!lhs.has_layout()) {
    Jet out = rhs;
    for (auto& c : out.coeffs_) c *= lhs.coeffs_[0];
    return out;
  }
  Jet a = lhs;
  Jet b;
  harmonize(a, rhs, b);
  const JetLayout& layout = *a.layout_;
  std::vector<complex> out(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const complex ai = a.coeffs_[i];
    if (ai == complex{}) continue;
    for (const auto& term : layout.product_terms(i)) {
      const complex bj = b.coeffs_[term.rhs];
      if (bj != complex{}) out[term.out] += ai * bj;
    }
  }
  return Jet::from_coefficients(a.layout_, std::move(out));
}

Jet& Jet::operator*=(const Jet& rhs) { return *this = *this * rhs; }

Jet& Jet::operator/=(const Jet& rhs) {
  if (!rhs.has_layout()) {
    if (rhs.coeffs_[0] == complex{}) throw DomainError("division by zero");
    for (auto& c : coeffs_) c /= rhs.coeffs_[0];
    return *this;
  }
  return *this = *this * reciprocal(rhs);
}

bool operator==(const Jet& a, const Jet& b) {
  if (a.layout_ != b.layout_) return false;
  return a.coeffs_ == b.coeffs_;
}

Jet complex_variable(int c, complex base, int num_vars, int degree) {
  if (2 * c + 1 >= num_vars) throw std::out_of_range("complex coordinate out of range");
  Jet z = Jet::variable(2 * c, base, num_vars, degree);
  if (degree >= 1) z.coeffs()[1 + 2 * c + 1] = complex{0.0, 1.0};
  return z;
}

Jet conj(const Jet& x) {
  Jet out = x;
  for (auto& c : out.coeffs()) c = std::conj(c);
  return out;
}

namespace {

// f(a0 + N) = sum_k series[k] N^k with N nilpotent of order degree + 1.
Jet apply_series(const Jet& x, std::span<const complex> series) {
  if (!x.has_layout()) return Jet(series[0]);
  Jet nilpotent = x;
  nilpotent.coeffs()[0] = complex{};
  Jet result(series[series.size() - 1]);
  for (std::size_t k = series.size() - 1; k-- > 0;) {
    result = result * nilpotent;
    result += Jet(series[k]);
  }
  if (!result.has_layout()) result = Jet::constant(result.value(), x.num_vars(), x.degree());
  return result;
}

}  // namespace

Jet reciprocal(const Jet& x) {
  const complex a0 = x.value();
  if (a0 == complex{}) throw DomainError("reciprocal of a jet with zero constant term");
  std::vector<complex> series(x.degree() + 1);
  complex term = 1.0 / a0;
  for (auto& s : series) {
    s = term;
    term *= -1.0 / a0;
  }
  return apply_series(x, series);
}

Jet exp(const Jet& x) {
  std::vector<complex> series(x.degree() + 1);
  complex term = std::exp(x.value());
  for (std::size_t k = 0; k < series.size(); ++k) {
    series[k] = term;
    term /= static_cast<double>(k + 1);
  }
  return apply_series(x, series);
}

Jet log(const Jet& x) {
  const complex a0 = x.value();
  if (a0 == complex{}) throw DomainError("log of a jet with zero constant term");
  std::vector<complex> series(x.degree() + 1);
  series[0] = std::log(a0);
  complex power = 1.0;
  for (std::size_t k = 1; k < series.size(); ++k) {
    power /= a0;
    series[k] = ((k % 2 == 1) ? 1.0 : -1.0) * power / static_cast<double>(k);
  }
  return apply_series(x, series);
}

Jet pow(const Jet& x, int exponent) {
  if (exponent < 0) return pow(reciprocal(x), -exponent);
  Jet result = x.has_layout() ? Jet::constant(1.0, x.num_vars(), x.degree()) : Jet(1.0);
  Jet base = x;
  unsigned e = static_cast<unsigned>(exponent);
  while (e != 0) {
    if (e & 1u) result *= base;
    e >>= 1;
    if (e != 0) base *= base;
  }
  return result;
}

Jet pow(const Jet& x, complex exponent) {
  const complex a0 = x.value();
  if (a0 == complex{}) throw DomainError("non-integer power of a jet with zero constant term");
  std::vector<complex> series(x.degree() + 1);
  complex binom = 1.0;
  const complex lead = std::exp(exponent * std::log(a0));
  complex power = 1.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    series[k] = lead * binom * power;
    binom *= (exponent - static_cast<double>(k)) / static_cast<double>(k + 1);
    power /= a0;
  }
  return apply_series(x, series);
}

Jet derivative(const Jet& x, int var) {
  if (!x.has_layout()) return Jet();
  if (var < 0 || var >= x.num_vars()) throw std::out_of_range("derivative variable out of range");
  if (x.degree() == 0) return Jet::constant(0.0, x.num_vars(), 0);
  auto layout = JetLayout::get(x.num_vars(), x.degree() - 1);
  std::vector<complex> out(layout->size());
  const auto c = x.coeffs();
  for (const auto& t : x.layout()->derivative_terms(var)) out[t.dst] += t.factor * c[t.src];
  return Jet::from_coefficients(std::move(layout), std::move(out));
}

namespace {

Jet wirtinger_step(const Jet& x, int c, double sign) {
  if (!x.has_layout()) return Jet();
  Jet dx = derivative(x, 2 * c);
  Jet dy = derivative(x, 2 * c + 1);
  const complex half_i{0.0, 0.5 * sign};
  auto out = dx.coeffs();
  auto in = dy.coeffs();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = 0.5 * out[k] + half_i * in[k];
  return dx;
}

}  // namespace

Jet d_holo(const Jet& x, int c) { return wirtinger_step(x, c, -1.0); }
Jet d_antiholo(const Jet& x, int c) { return wirtinger_step(x, c, 1.0); }

complex wirtinger(const Jet& f, std::span<const int> holo, std::span<const int> antiholo) {
  int total = 0;
  for (int o : holo) total += o;
  for (int o : antiholo) total += o;
  if (total > f.degree() && f.has_layout())
    throw std::domain_error("requested derivative order " + std::to_string(total) +
                            " exceeds jet degree " + std::to_string(f.degree()));
  if (!f.has_layout()) return total == 0 ? f.value() : complex{};
  Jet g = f;
  for (std::size_t c = 0; c < holo.size(); ++c)
    for (int k = 0; k < holo[c]; ++k) g = d_holo(g, static_cast<int>(c));
  for (std::size_t c = 0; c < antiholo.size(); ++c)
    for (int k = 0; k < antiholo[c]; ++k) g = d_antiholo(g, static_cast<int>(c));
  return g.value();
}

}  // namespace kahler
