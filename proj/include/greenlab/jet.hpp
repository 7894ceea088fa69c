#pragma once

// Truncated multivariate Taylor polynomials ("jets") for forward-mode
// differentiation to fixed order. A Jet<Vars, Order> carries every partial
// derivative of total degree <= Order in Vars variables, so Jet<3, 3> is the
// multi-directional equivalent of a dual number nested three deep.

#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

#include <Eigen/Core>

namespace greenlab {

namespace detail {

constexpr int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

constexpr double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Monomials of total degree <= Order, grouped by degree and ordered
// lexicographically inside a degree. The order within a degree does not
// depend on Order, so a lower-order jet is a coefficient prefix of a higher one.
template <int Vars, int Order>
struct Monomials {
  static constexpr int size = binomial(Vars + Order, Order);
  using Exponents = std::array<int, Vars>;

  struct Table {
    std::array<Exponents, size> exps{};
    std::array<int, size> degree{};
    std::array<std::array<int, 3>, size * size> products{};
    int n_products = 0;
  };

  static constexpr int degree_of(const Exponents& e) {
    int d = 0;
    for (int v : e) d += v;
    return d;
  }

  static constexpr Table make() {
    Table t{};
    int idx = 0;
    for (int d = 0; d <= Order; ++d) {
      Exponents e{};
      while (true) {
        if (degree_of(e) == d) {
          t.exps[idx] = e;
          t.degree[idx] = d;
          ++idx;
        }
        // lexicographic odometer, most significant digit first
        int pos = Vars - 1;
        while (pos >= 0 && e[pos] == Order) {
          e[pos] = 0;
          --pos;
        }
        if (pos < 0) break;
        ++e[pos];
      }
    }
    for (int a = 0; a < size; ++a) {
      for (int b = 0; b < size; ++b) {
        if (t.degree[a] + t.degree[b] > Order) continue;
        Exponents sum{};
        for (int v = 0; v < Vars; ++v) sum[v] = t.exps[a][v] + t.exps[b][v];
        for (int c = 0; c < size; ++c) {
          if (t.exps[c] == sum) {
            t.products[t.n_products++] = {a, b, c};
            break;
          }
        }
      }
    }
    return t;
  }

  static constexpr Table table = make();

  static constexpr int index_of(const Exponents& e) {
    for (int i = 0; i < size; ++i)
      if (table.exps[i] == e) return i;
    return -1;
  }

  static constexpr int unit_index(int var) {
    Exponents e{};
    e[var] = 1;
    return index_of(e);
  }
};

}  // namespace detail

template <int Vars, int Order>
class Jet {
  using Mono = detail::Monomials<Vars, Order>;

 public:
  static constexpr int kVars = Vars;
  static constexpr int kOrder = Order;
  static constexpr int kSize = Mono::size;
  using Exponents = typename Mono::Exponents;
  using Coeffs = std::array<double, kSize>;

  constexpr Jet() = default;
  constexpr Jet(double value) { c_[0] = value; }  // NOLINT: implicit by design of scalar types

  /// Independent variable `var` located at `value`.
  static constexpr Jet variable(double value, int var) {
    Jet j(value);
    if constexpr (Order > 0) j.c_[Mono::unit_index(var)] = 1.0;
    return j;
  }

  constexpr double value() const { return c_[0]; }
  constexpr const Coeffs& coeffs() const { return c_; }
  constexpr Coeffs& coeffs() { return c_; }

  /// Taylor coefficient of the monomial with exponents `e`.
  constexpr double coeff(const Exponents& e) const {
    const int i = Mono::index_of(e);
    return i < 0 ? 0.0 : c_[i];
  }

  /// Partial derivative d^e f at the expansion point.
  constexpr double partial(const Exponents& e) const {
    double scale = 1.0;
    for (int v : e) scale *= detail::factorial(v);
    return scale * coeff(e);
  }

  double d(int i) const {
    Exponents e{};
    e[i] += 1;
    return partial(e);
  }
  double d(int i, int j) const {
    Exponents e{};
    e[i] += 1;
    e[j] += 1;
    return partial(e);
  }
  double d(int i, int j, int k) const {
    Exponents e{};
    e[i] += 1;
    e[j] += 1;
    e[k] += 1;
    return partial(e);
  }

  static constexpr const auto& monomials() { return Mono::table; }

  Jet& operator+=(const Jet& o) {
    for (int i = 0; i < kSize; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int i = 0; i < kSize; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) {
    for (auto& x : a.c_) x = -x;
    return a;
  }
  friend Jet operator+(const Jet& a) { return a; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    const auto& t = Mono::table;
    for (int p = 0; p < t.n_products; ++p) {
      const auto& [ia, ib, ic] = t.products[p];
      r.c_[ic] += a.c_[ia] * b.c_[ib];
    }
    return r;
  }
  friend Jet operator*(Jet a, double s) {
    for (auto& x : a.c_) x *= s;
    return a;
  }
  friend Jet operator*(double s, Jet a) { return a * s; }
  friend Jet operator/(Jet a, double s) { return a * (1.0 / s); }
  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
  friend Jet operator/(double a, const Jet& b) { return a * reciprocal(b); }

  // Comparisons look at the value only.
  friend bool operator<(const Jet& a, const Jet& b) { return a.value() < b.value(); }
  friend bool operator>(const Jet& a, const Jet& b) { return a.value() > b.value(); }
  friend bool operator<=(const Jet& a, const Jet& b) { return a.value() <= b.value(); }
  friend bool operator>=(const Jet& a, const Jet& b) { return a.value() >= b.value(); }
  friend bool operator==(const Jet& a, const Jet& b) { return a.c_ == b.c_; }

  /// sum_k series[k] * (x - x.value())^k, evaluated by Horner on the nilpotent part.
  friend Jet apply_series(const Jet& x, const std::array<double, Order + 1>& series) {
    Jet nil = x;
    nil.c_[0] = 0.0;
    Jet r(series[Order]);
    for (int k = Order - 1; k >= 0; --k) {
      r = r * nil;
      r.c_[0] += series[k];
    }
    return r;
  }

  friend Jet reciprocal(const Jet& x) {
    std::array<double, Order + 1> s{};
    const double inv = 1.0 / x.value();
    double p = inv;
    for (int k = 0; k <= Order; ++k, p *= -inv) s[k] = p;
    return apply_series(x, s);
  }

  friend Jet exp(const Jet& x) {
    std::array<double, Order + 1> s{};
    const double e = std::exp(x.value());
    for (int k = 0; k <= Order; ++k) s[k] = e / detail::factorial(k);
    return apply_series(x, s);
  }

  friend Jet expm1(const Jet& x) {
    Jet r = exp(x);
    r.c_[0] = std::expm1(x.value());
    return r;
  }

  friend Jet log(const Jet& x) {
    std::array<double, Order + 1> s{};
    const double a = x.value();
    s[0] = std::log(a);
    double p = 1.0;
    for (int k = 1; k <= Order; ++k) {
      p /= a;
      s[k] = ((k % 2) ? 1.0 : -1.0) * p / k;
    }
    return apply_series(x, s);
  }

  friend Jet pow(const Jet& x, double e) {
    std::array<double, Order + 1> s{};
    const double a = x.value();
    double binom = 1.0;
    for (int k = 0; k <= Order; ++k) {
      s[k] = binom * std::pow(a, e - k);
      binom *= (e - k) / (k + 1);
    }
    return apply_series(x, s);
  }

  friend Jet sqrt(const Jet& x) { return pow(x, 0.5); }

  friend Jet sin(const Jet& x) {
    std::array<double, Order + 1> s{};
    const double sa = std::sin(x.value()), ca = std::cos(x.value());
    for (int k = 0; k <= Order; ++k) {
      const double sign = ((k / 2) % 2) ? -1.0 : 1.0;
      s[k] = sign * ((k % 2) ? ca : sa) / detail::factorial(k);
    }
    return apply_series(x, s);
  }

  friend Jet cos(const Jet& x) {
    std::array<double, Order + 1> s{};
    const double sa = std::sin(x.value()), ca = std::cos(x.value());
    for (int k = 0; k <= Order; ++k) {
      const double sign = (((k + 1) / 2) % 2) ? -1.0 : 1.0;
      s[k] = sign * ((k % 2) ? sa : ca) / detail::factorial(k);
    }
    return apply_series(x, s);
  }

  friend Jet sinh(const Jet& x) {
    std::array<double, Order + 1> s{};
    const double sh = std::sinh(x.value()), ch = std::cosh(x.value());
    for (int k = 0; k <= Order; ++k) s[k] = ((k % 2) ? ch : sh) / detail::factorial(k);
    return apply_series(x, s);
  }

  friend Jet cosh(const Jet& x) {
    std::array<double, Order + 1> s{};
    const double sh = std::sinh(x.value()), ch = std::cosh(x.value());
    for (int k = 0; k <= Order; ++k) s[k] = ((k % 2) ? sh : ch) / detail::factorial(k);
    return apply_series(x, s);
  }

  friend Jet erf(const Jet& x) {
    // erf' = 2/sqrt(pi) exp(-x^2); integrate its univariate series term by term.
    std::array<double, Order + 1> s{};
    s[0] = std::erf(x.value());
    if constexpr (Order > 0) {
      using Uni = Jet<1, Order - 1>;
      const Uni tau = Uni::variable(x.value(), 0);
      const Uni g = exp(-(tau * tau)) * (2.0 / std::sqrt(std::numbers::pi));
      for (int k = 1; k <= Order; ++k) s[k] = g.coeffs()[k - 1] / k;
    }
    return apply_series(x, s);
  }

  friend Jet abs(const Jet& x) { return x.value() < 0 ? -x : x; }

  friend std::ostream& operator<<(std::ostream& os, const Jet& x) {
    os << "Jet(" << x.value();
    for (int i = 1; i < kSize; ++i) os << ", " << x.c_[i];
    return os << ")";
  }

 private:
  Coeffs c_{};
};

/// First-order partial derivative as a polynomial, exact to one order lower.
template <int V, int O>
Jet<V, O - 1> partial(const Jet<V, O>& x, int var) {
  static_assert(O >= 1);
  Jet<V, O - 1> r;
  const auto& lower = Jet<V, O - 1>::monomials();
  for (int i = 0; i < Jet<V, O - 1>::kSize; ++i) {
    auto e = lower.exps[i];
    const int power = e[var] + 1;
    e[var] = power;
    r.coeffs()[i] = power * x.coeff(e);
  }
  return r;
}

/// Drop every term above order N.
template <int N, int V, int O>
Jet<V, N> truncate(const Jet<V, O>& x) {
  static_assert(N <= O);
  Jet<V, N> r;
  for (int i = 0; i < Jet<V, N>::kSize; ++i) r.coeffs()[i] = x.coeffs()[i];
  return r;
}

/// Antiderivative of a univariate series, with constant term `c0`.
template <int O>
Jet<1, O + 1> integrate(const Jet<1, O>& x, double c0) {
  Jet<1, O + 1> r(c0);
  for (int k = 0; k <= O; ++k) r.coeffs()[k + 1] = x.coeffs()[k] / (k + 1);
  return r;
}

/// Substitute the nilpotent part of `x` into the univariate Taylor series
/// `series` (expanded about x.value()).
template <int V, int O>
Jet<V, O> compose(const Jet<1, O>& series, const Jet<V, O>& x) {
  std::array<double, O + 1> s{};
  for (int k = 0; k <= O; ++k) s[k] = series.coeffs()[k];
  return apply_series(x, s);
}
template <int O>
double compose(const Jet<1, O>& series, double) {
  return series.value();
}

inline double value_of(double x) { return x; }
template <int V, int O>
double value_of(const Jet<V, O>& x) {
  return x.value();
}

template <class T>
inline constexpr bool is_jet_v = false;
template <int V, int O>
inline constexpr bool is_jet_v<Jet<V, O>> = true;

}  // namespace greenlab

namespace Eigen {

template <int V, int O>
struct NumTraits<greenlab::Jet<V, O>> : NumTraits<double> {
  using Real = greenlab::Jet<V, O>;
  using NonInteger = greenlab::Jet<V, O>;
  using Nested = greenlab::Jet<V, O>;
  using Literal = greenlab::Jet<V, O>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = greenlab::Jet<V, O>::kSize,
    AddCost = greenlab::Jet<V, O>::kSize,
    MulCost = greenlab::Jet<V, O>::kSize * greenlab::Jet<V, O>::kSize
  };
};

}  // namespace Eigen
