#include "caustic/optics.hpp"

#include <array>
#include <limits>

#include "caustic/quartic.hpp"

namespace caustic {

double snell_residual(double k, double eta, double x, double y, double z, double z0) {
  const Vec3 A{k * x, k * y, z0};
  const Vec3 a = normalized(A);
  const Vec3 b = normalized(Vec3{x, y, z} - A);
  const Vec3 m = eta * b - a;
  return std::hypot(m.x, m.y);
}

double incident_root(double eta, double x, double y, double z, double z0) {
  if (!(z0 > 0.0) || !(z > z0)) throw GeometryError("incident_root: require 0 < z0 < z");
  const QuarticCoeffs c = refraction_quartic(eta, x, y, z, z0);
  const std::array<double, 5> poly{c.c0, c.c1, c.c2, c.c3, c.c4};

  std::array<double, 4> roots{};
  const int n = solve_quartic(c.c4, c.c3, c.c2, c.c1, c.c0, roots);
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_res = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double k = roots[i];
    if (!(k >= -1e-9 && k <= 1.0 + 1e-9)) continue;
    const double kc = std::clamp(k, 0.0, 1.0);
    const double res = snell_residual(kc, eta, x, y, z, z0);
    if (res < best_res) {
      best_res = res;
      best = kc;
    }
  }

  // F(0) = eta^2 z0^2 > 0 and F(1) = -(z - z0)^2 < 0, so [0, 1] always
  // brackets the root; the bracket guards the Newton polish and stands in
  // when the closed form loses every candidate to cancellation.
  double lo = 0.0, hi = 1.0;
  if (!(eval_poly4(poly, lo) > 0.0) || !(eval_poly4(poly, hi) < 0.0))
    throw GeometryError("incident_root: quartic does not change sign on [0, 1]");
  double k = std::isnan(best) ? 0.5 : best;
  const double tol = 1e-15 * c.scale();
  for (int it = 0; it < 100; ++it) {
    const double f = eval_poly4(poly, k);
    if (std::abs(f) <= tol) break;
    if (f > 0) lo = k;
    else hi = k;
    const double df = c.derivative(k);
    double next = df != 0.0 ? k - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == k || hi - lo <= 4 * std::numeric_limits<double>::epsilon()) break;
    k = next;
  }
  return k;
}

}  // namespace caustic
