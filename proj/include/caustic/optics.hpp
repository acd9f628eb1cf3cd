#pragma once

// Optical kernels: solid angle of a triangle seen from an emitter, inverse
// refraction through the planar front face, refraction out of a back face,
// and projection onto the receiving plane. All kernels are templates over
// the scalar so they run on doubles and on Dual<K>.

#include <algorithm>
#include <cmath>
#include <sstream>

#include "caustic/dual.hpp"
#include "caustic/error.hpp"
#include "caustic/vec.hpp"

namespace caustic {

/// Coefficients of the inverse-refraction quartic in k. Inputs are relative
/// to the emitter: back vertex A' = (x, y, z), front plane at z = z0, and
/// the incident point is A = (k x, k y, z0).
template <typename T>
struct QuarticCoeffsT {
  T c4, c3, c2, c1, c0;

  template <typename K>
  auto operator()(const K& k) const {
    return (((c4 * k + c3) * k + c2) * k + c1) * k + c0;
  }
  double derivative(double k) const {
    return ((4 * value_of(c4) * k + 3 * value_of(c3)) * k + 2 * value_of(c2)) * k + value_of(c1);
  }
  double scale() const {
    return std::max({std::abs(value_of(c4)), std::abs(value_of(c3)), std::abs(value_of(c2)),
                     std::abs(value_of(c1)), std::abs(value_of(c0))});
  }
};

using QuarticCoeffs = QuarticCoeffsT<double>;

template <typename T>
QuarticCoeffsT<T> refraction_quartic(double eta, const T& x, const T& y, const T& z, const T& z0) {
  const double e2 = eta * eta;
  const T lateral = (e2 - 1.0) * (x * x + y * y);
  const T depth = z - z0;
  const T ez = e2 * (z0 * z0);
  return {lateral, -2.0 * lateral, lateral + ez - depth * depth, -2.0 * ez, ez};
}

/// Root k in [0, 1] of the inverse-refraction quartic for an off-axis back
/// vertex. Closed-form Ferrari roots are filtered to [0, 1], the candidate
/// with the smallest Snell residual is kept and polished by bracketed Newton.
/// Throws GeometryError when the vertex is not behind the front plane or no
/// root can be bracketed.
double incident_root(double eta, double x, double y, double z, double z0);

/// Lateral norm of (eta b - a) for incident point (k x, k y, z0): zero
/// exactly when Snell's law holds at the flat front face.
double snell_residual(double k, double eta, double x, double y, double z, double z0);

/// Lifts a real root of F(k; p) = 0 to a dual whose partials are
/// -(dF/dp) / (dF/dk) (implicit function theorem). `coeffs` carries the
/// parameter dependence in its partials.
template <std::size_t K>
Dual<K> implicit_root_derivative(const QuarticCoeffsT<Dual<K>>& coeffs, double k) {
  const double dfdk = coeffs.derivative(k);
  const double scale = coeffs.scale();
  if (!(std::abs(dfdk) > 1e-12 * scale)) {
    std::ostringstream msg;
    msg << "quartic root k=" << k << " is (nearly) double: |dF/dk|=" << std::abs(dfdk)
        << " vs scale " << scale;
    throw IllConditionedRoot(msg.str(), scale / std::max(std::abs(dfdk), 1e-300));
  }
  const Dual<K> f = coeffs(k);
  Dual<K> r(k);
  for (std::size_t i = 0; i < K; ++i) r.d[i] = -f.d[i] / dfdk;
  return r;
}

/// Below this squared lateral offset a back vertex is treated as on the
/// emitter's axis.
inline constexpr double kAxialTolerance2 = 1e-18;

/// Point where the ray from `source` that reaches `back_vertex` after
/// refraction crosses the front plane z = front_z.
template <typename T>
Vec3T<T> incident_point(const Vec3T<T>& source, const Vec3T<T>& back_vertex, double front_z, double eta) {
  const Vec3T<T> rel = back_vertex - source;
  const T z0 = front_z - source.z;
  if (!(value_of(z0) > 0.0) || !(value_of(rel.z) > value_of(z0)))
    throw GeometryError("incident_point: require source.z < front_z < back_vertex.z");

  const double rx = value_of(rel.x), ry = value_of(rel.y);
  T k;
  if (rx * rx + ry * ry < kAxialTolerance2) {
    // Paraxial limit of the quartic: eta z0 (1 - k) = (z - z0) k.
    k = eta * z0 / (eta * z0 + (rel.z - z0));
  } else {
    const double kv = incident_root(eta, rx, ry, value_of(rel.z), value_of(z0));
    if constexpr (is_dual_v<T>) {
      k = implicit_root_derivative(refraction_quartic(eta, rel.x, rel.y, rel.z, z0), kv);
    } else {
      k = kv;
    }
  }
  return {source.x + k * rel.x, source.y + k * rel.y, T(front_z)};
}

/// Solid angle of triangle (p1, p2, p3) seen from `apex`:
/// 2 atan2(r1 . (r2 x r3), 1 + r1.r2 + r1.r3 + r2.r3) with unit r_i.
/// Nonnegative for triangles that wind counter-clockwise about the apex's
/// line of sight.
template <typename T>
T solid_angle(const Vec3T<T>& apex, const Vec3T<T>& p1, const Vec3T<T>& p2, const Vec3T<T>& p3) {
  using std::atan2;
  const Vec3T<T> d1 = p1 - apex, d2 = p2 - apex, d3 = p3 - apex;
  if (value_of(dot(d1, d1)) == 0.0 || value_of(dot(d2, d2)) == 0.0 || value_of(dot(d3, d3)) == 0.0)
    throw GeometryError("solid_angle: apex coincides with a triangle vertex");
  const Vec3T<T> r1 = normalized(d1), r2 = normalized(d2), r3 = normalized(d3);
  const T num = dot(r1, cross(r2, r3));
  const T den = 1.0 + dot(r1, r2) + dot(r1, r3) + dot(r2, r3);
  return 2.0 * atan2(num, den);
}

/// Exit direction through a back face with unit normal `normal` from the
/// unit in-lens direction `incident`. Returns false on total internal
/// reflection (negative discriminant).
template <typename T>
bool try_refract_exit(const Vec3T<T>& incident, const Vec3T<T>& normal, double eta, Vec3T<T>& out) {
  using std::sqrt;
  const T c = dot(incident, normal);
  const T disc = 1.0 + eta * eta * (c * c - 1.0);
  if (value_of(disc) < 0.0) return false;
  out = normal * sqrt(disc) + (incident - normal * c) * eta;
  return true;
}

template <typename T>
Vec3T<T> refract_exit(const Vec3T<T>& incident, const Vec3T<T>& normal, double eta, long triangle = -1) {
  Vec3T<T> out;
  if (!try_refract_exit(incident, normal, eta, out))
    throw TotalInternalReflection("total internal reflection at back face", triangle);
  return out;
}

/// Intersection of the ray point + t dir with the plane z = plane_z.
template <typename T>
Vec3T<T> project_to_plane(const Vec3T<T>& point, const Vec3T<T>& dir, double plane_z) {
  if (!(value_of(dir.z) > 0.0)) throw RayMissError("ray does not travel toward the receiving plane");
  const T t = (plane_z - point.z) / dir.z;
  return {point.x + t * dir.x, point.y + t * dir.y, T(plane_z)};
}

}  // namespace caustic
