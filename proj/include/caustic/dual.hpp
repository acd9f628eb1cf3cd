#pragma once

// Fixed-width forward-mode dual numbers.
//
// A Dual<K> carries a value and K partial derivatives. Every flux contribution
// in the renderer depends on exactly three scalars (one emitter's x, y, q or
// one triangle's three vertex heights), so K = 3 covers the hot path; wider
// instances are used by the curvature stencil and by the test-only reference
// tape.
//
// Branches are taken on the value; partials follow the taken branch.

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <type_traits>

namespace caustic {

template <std::size_t K>
struct Dual {
  double v = 0.0;
  std::array<double, K> d{};

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT: implicit lift of constants
  constexpr Dual(double value, const std::array<double, K>& partials) : v(value), d(partials) {}

  /// Independent variable: partial `slot` is 1, the rest 0.
  static constexpr Dual variable(double value, std::size_t slot) {
    Dual r(value);
    r.d[slot] = 1.0;
    return r;
  }

  constexpr Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t i = 0; i < K; ++i) d[i] += o.d[i];
    return *this;
  }
  constexpr Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t i = 0; i < K; ++i) d[i] -= o.d[i];
    return *this;
  }
  constexpr Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < K; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  constexpr Dual& operator/=(const Dual& o) {
    assert(o.v != 0.0 && "dual division by zero");
    const double inv = 1.0 / o.v;
    const double q = v / o.v;
    for (std::size_t i = 0; i < K; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
    v = q;
    return *this;
  }
  constexpr Dual& operator*=(double s) {
    v *= s;
    for (auto& x : d) x *= s;
    return *this;
  }
};

template <typename T>
struct is_dual : std::false_type {};
template <std::size_t K>
struct is_dual<Dual<K>> : std::true_type {};
template <typename T>
inline constexpr bool is_dual_v = is_dual<T>::value;

/// Value component of a real or dual scalar.
inline constexpr double value_of(double x) { return x; }
template <std::size_t K>
constexpr double value_of(const Dual<K>& x) {
  return x.v;
}

template <std::size_t K>
constexpr Dual<K> operator-(Dual<K> a) {
  a.v = -a.v;
  for (auto& x : a.d) x = -x;
  return a;
}

template <std::size_t K>
constexpr Dual<K> operator+(Dual<K> a, const Dual<K>& b) {
  return a += b;
}
template <std::size_t K>
constexpr Dual<K> operator-(Dual<K> a, const Dual<K>& b) {
  return a -= b;
}
template <std::size_t K>
constexpr Dual<K> operator*(Dual<K> a, const Dual<K>& b) {
  return a *= b;
}
template <std::size_t K>
constexpr Dual<K> operator/(Dual<K> a, const Dual<K>& b) {
  return a /= b;
}

template <std::size_t K>
constexpr Dual<K> operator+(Dual<K> a, double b) {
  a.v += b;
  return a;
}
template <std::size_t K>
constexpr Dual<K> operator+(double a, Dual<K> b) {
  b.v += a;
  return b;
}
template <std::size_t K>
constexpr Dual<K> operator-(Dual<K> a, double b) {
  a.v -= b;
  return a;
}
template <std::size_t K>
constexpr Dual<K> operator-(double a, const Dual<K>& b) {
  Dual<K> r = -b;
  r.v = a - b.v;
  return r;
}
template <std::size_t K>
constexpr Dual<K> operator*(Dual<K> a, double b) {
  return a *= b;
}
template <std::size_t K>
constexpr Dual<K> operator*(double a, Dual<K> b) {
  return b *= a;
}
template <std::size_t K>
constexpr Dual<K> operator/(Dual<K> a, double b) {
  assert(b != 0.0 && "dual division by zero");
  a.v /= b;
  for (auto& x : a.d) x /= b;
  return a;
}
template <std::size_t K>
constexpr Dual<K> operator/(double a, const Dual<K>& b) {
  return Dual<K>(a) / b;
}

// Comparisons act on values only.
template <std::size_t K>
constexpr bool operator<(const Dual<K>& a, const Dual<K>& b) {
  return a.v < b.v;
}
template <std::size_t K>
constexpr bool operator<(const Dual<K>& a, double b) {
  return a.v < b;
}
template <std::size_t K>
constexpr bool operator<(double a, const Dual<K>& b) {
  return a < b.v;
}
template <std::size_t K>
constexpr bool operator>(const Dual<K>& a, const Dual<K>& b) {
  return a.v > b.v;
}
template <std::size_t K>
constexpr bool operator>(const Dual<K>& a, double b) {
  return a.v > b;
}
template <std::size_t K>
constexpr bool operator>(double a, const Dual<K>& b) {
  return a > b.v;
}
template <std::size_t K>
constexpr bool operator<=(const Dual<K>& a, const Dual<K>& b) {
  return a.v <= b.v;
}
template <std::size_t K>
constexpr bool operator<=(const Dual<K>& a, double b) {
  return a.v <= b;
}
template <std::size_t K>
constexpr bool operator>=(const Dual<K>& a, const Dual<K>& b) {
  return a.v >= b.v;
}
template <std::size_t K>
constexpr bool operator>=(const Dual<K>& a, double b) {
  return a.v >= b;
}

// Elementary functions. Each applies f(v) and scales the partials by f'(v).
namespace detail {
template <std::size_t K>
constexpr Dual<K> chain(const Dual<K>& x, double fx, double dfx) {
  Dual<K> r(fx);
  for (std::size_t i = 0; i < K; ++i) r.d[i] = dfx * x.d[i];
  return r;
}
}  // namespace detail

template <std::size_t K>
Dual<K> sqrt(const Dual<K>& x) {
  assert(x.v >= 0.0 && "dual sqrt of negative value");
  const double s = std::sqrt(x.v);
  // d/dx sqrt at 0 is unbounded; a zero radicand only occurs on degenerate
  // geometry that callers already discard, so report a zero slope there.
  return detail::chain(x, s, s > 0.0 ? 0.5 / s : 0.0);
}

/// |x| with subgradient 0 at x == 0.
template <std::size_t K>
Dual<K> abs(const Dual<K>& x) {
  if (x.v > 0.0) return x;
  if (x.v < 0.0) return -x;
  return Dual<K>(0.0);
}

template <std::size_t K>
Dual<K> atan2(const Dual<K>& y, const Dual<K>& x) {
  const double r2 = x.v * x.v + y.v * y.v;
  Dual<K> r(std::atan2(y.v, x.v));
  if (r2 == 0.0) return r;
  for (std::size_t i = 0; i < K; ++i) r.d[i] = (x.v * y.d[i] - y.v * x.d[i]) / r2;
  return r;
}

template <std::size_t K>
Dual<K> pow(const Dual<K>& x, double p) {
  const double fx = std::pow(x.v, p);
  return detail::chain(x, fx, x.v != 0.0 ? p * fx / x.v : (p == 1.0 ? 1.0 : 0.0));
}

template <std::size_t K>
Dual<K> exp(const Dual<K>& x) {
  const double e = std::exp(x.v);
  return detail::chain(x, e, e);
}

template <std::size_t K>
Dual<K> log(const Dual<K>& x) {
  return detail::chain(x, std::log(x.v), 1.0 / x.v);
}

template <std::size_t K>
bool isfinite(const Dual<K>& x) {
  if (!std::isfinite(x.v)) return false;
  for (double p : x.d)
    if (!std::isfinite(p)) return false;
  return true;
}

template <std::size_t K>
std::ostream& operator<<(std::ostream& os, const Dual<K>& x) {
  os << x.v << " [";
  for (std::size_t i = 0; i < K; ++i) os << (i ? ", " : "") << x.d[i];
  return os << "]";
}

}  // namespace caustic
