#pragma once

#include <cmath>

#include "caustic/dual.hpp"

namespace caustic {

/// 3-vector over a real or dual scalar. Positions are in cm.
template <typename T>
struct Vec3T {
  T x{}, y{}, z{};

  constexpr Vec3T() = default;
  constexpr Vec3T(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}
  template <typename U>
    requires(!std::is_same_v<T, U> && std::is_convertible_v<U, T>)
  constexpr explicit Vec3T(const Vec3T<U>& o) : x(T(o.x)), y(T(o.y)), z(T(o.z)) {}

  constexpr Vec3T& operator+=(const Vec3T& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3T& operator-=(const Vec3T& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
};

using Vec3 = Vec3T<double>;

template <typename T>
constexpr Vec3T<T> operator+(Vec3T<T> a, const Vec3T<T>& b) {
  return a += b;
}
template <typename T>
constexpr Vec3T<T> operator-(Vec3T<T> a, const Vec3T<T>& b) {
  return a -= b;
}
template <typename T>
constexpr Vec3T<T> operator-(const Vec3T<T>& a) {
  return {-a.x, -a.y, -a.z};
}
template <typename T, typename S>
constexpr Vec3T<T> operator*(const S& s, const Vec3T<T>& a) {
  return {a.x * s, a.y * s, a.z * s};
}
template <typename T, typename S>
constexpr Vec3T<T> operator*(const Vec3T<T>& a, const S& s) {
  return {a.x * s, a.y * s, a.z * s};
}
template <typename T, typename S>
constexpr Vec3T<T> operator/(const Vec3T<T>& a, const S& s) {
  return {a.x / s, a.y / s, a.z / s};
}

template <typename T>
constexpr T dot(const Vec3T<T>& a, const Vec3T<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <typename T>
constexpr Vec3T<T> cross(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <typename T>
T norm(const Vec3T<T>& a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

template <typename T>
Vec3T<T> normalized(const Vec3T<T>& a) {
  return a / norm(a);
}

template <typename T>
Vec3 value_of(const Vec3T<T>& a) {
  return {value_of(a.x), value_of(a.y), value_of(a.z)};
}

template <typename T>
bool is_finite(const Vec3T<T>& a) {
  using std::isfinite;
  return isfinite(a.x) && isfinite(a.y) && isfinite(a.z);
}

/// Point in the receiving plane (cm).
template <typename T>
struct Vec2T {
  T x{}, y{};
};

using Vec2 = Vec2T<double>;

}  // namespace caustic
