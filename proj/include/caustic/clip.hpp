#pragma once

// Convex polygon clipping against axis-aligned half-planes
// (Sutherland-Hodgman) and shoelace areas, generic over the scalar.

#include <array>

#include "caustic/geometry.hpp"

namespace caustic {

/// A triangle clipped by four axis-aligned half-planes has at most 7
/// vertices.
template <typename T>
struct ConvexPolygon {
  std::array<Vec2T<T>, 8> v;
  int n = 0;

  void push(const Vec2T<T>& p) { v[n++] = p; }
};

enum class Axis { X, Y };

namespace detail {
template <typename T>
const T& coord(const Vec2T<T>& p, Axis axis) {
  return axis == Axis::X ? p.x : p.y;
}
}  // namespace detail

/// Keeps the part of `in` with coordinate >= bound (keep_above) or <= bound.
/// Inclusion is decided on values; points exactly on the line are kept.
template <typename T>
ConvexPolygon<T> clip_halfplane(const ConvexPolygon<T>& in, Axis axis, double bound, bool keep_above) {
  ConvexPolygon<T> out;
  if (in.n == 0) return out;
  auto inside = [&](const Vec2T<T>& p) {
    const double c = value_of(detail::coord(p, axis));
    return keep_above ? c >= bound : c <= bound;
  };
  for (int i = 0; i < in.n; ++i) {
    const Vec2T<T>& a = in.v[i];
    const Vec2T<T>& b = in.v[(i + 1) % in.n];
    const bool ia = inside(a), ib = inside(b);
    if (ia) out.push(a);
    if (ia != ib) {
      const T ca = detail::coord(a, axis), cb = detail::coord(b, axis);
      const T t = (bound - ca) / (cb - ca);
      if (axis == Axis::X) out.push({T(bound), a.y + t * (b.y - a.y)});
      else out.push({a.x + t * (b.x - a.x), T(bound)});
    }
  }
  return out;
}

/// Keeps the part of `in` inside the slab [lo, hi] along `axis`.
template <typename T>
ConvexPolygon<T> clip_slab(const ConvexPolygon<T>& in, Axis axis, double lo, double hi) {
  return clip_halfplane(clip_halfplane(in, axis, lo, true), axis, hi, false);
}

/// Signed shoelace area (positive for counter-clockwise winding).
template <typename T>
T polygon_area(const ConvexPolygon<T>& poly) {
  T twice(0.0);
  for (int i = 0; i < poly.n; ++i) {
    const auto& a = poly.v[i];
    const auto& b = poly.v[(i + 1) % poly.n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

template <typename T>
ConvexPolygon<T> to_polygon(const Triangle2DT<T>& tri) {
  ConvexPolygon<T> poly;
  for (const auto& p : tri.p) poly.push(p);
  return poly;
}

/// Area of tri intersected with rect. Orientation-independent; degenerate
/// input gives 0.
template <typename T>
T clip_triangle_to_rect(const Triangle2DT<T>& tri, const Rect& rect) {
  if (tri.degenerate()) return T(0.0);
  auto poly = clip_slab(clip_slab(to_polygon(tri), Axis::X, rect.x0, rect.x1), Axis::Y, rect.y0, rect.y1);
  if (poly.n < 3) return T(0.0);
  T a = polygon_area(poly);
  return value_of(a) < 0 ? -a : a;
}

}  // namespace caustic
