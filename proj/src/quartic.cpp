#include "caustic/quartic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace caustic {
namespace {

int solve_quadratic(double a, double b, double c, double* out) {
  if (a == 0.0) {
    if (b == 0.0) return 0;
    out[0] = -c / b;
    return 1;
  }
  const double disc = b * b - 4 * a * c;
  if (disc < 0) return 0;
  // Cancellation-free form.
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  if (q == 0.0) {
    out[0] = out[1] = 0.0;
    return 2;
  }
  out[0] = q / a;
  out[1] = c / q;
  return 2;
}

double polish(const std::array<double, 5>& c, double x) {
  for (int it = 0; it < 6; ++it) {
    const double f = eval_poly4(c, x);
    const double df = ((4 * c[4] * x + 3 * c[3]) * x + 2 * c[2]) * x + c[1];
    if (df == 0.0) break;
    const double nx = x - f / df;
    if (!std::isfinite(nx)) break;
    // Keep the step only if it does not increase the residual.
    if (std::abs(eval_poly4(c, nx)) > std::abs(f)) break;
    if (nx == x) break;
    x = nx;
  }
  return x;
}

}  // namespace

int solve_cubic(double c3, double c2, double c1, double c0, std::array<double, 3>& roots) {
  if (c3 == 0.0) {
    double tmp[2];
    const int n = solve_quadratic(c2, c1, c0, tmp);
    for (int i = 0; i < n; ++i) roots[i] = tmp[i];
    return n;
  }
  const double a = c2 / c3, b = c1 / c3, c = c0 / c3;
  const double Q = (a * a - 3 * b) / 9;
  const double R = (2 * a * a * a - 9 * a * b + 27 * c) / 54;
  const double Q3 = Q * Q * Q;
  if (R * R < Q3) {
    const double theta = std::acos(std::clamp(R / std::sqrt(Q3), -1.0, 1.0));
    const double m = -2 * std::sqrt(Q);
    roots[0] = m * std::cos(theta / 3) - a / 3;
    roots[1] = m * std::cos((theta + 2 * std::numbers::pi) / 3) - a / 3;
    roots[2] = m * std::cos((theta - 2 * std::numbers::pi) / 3) - a / 3;
    return 3;
  }
  const double A = -std::copysign(std::cbrt(std::abs(R) + std::sqrt(R * R - Q3)), R);
  const double B = A != 0.0 ? Q / A : 0.0;
  roots[0] = A + B - a / 3;
  if (std::abs(A - B) <= 1e-14 * std::max(std::abs(A), 1.0)) {
    roots[1] = -0.5 * (A + B) - a / 3;
    return 2;
  }
  return 1;
}

int solve_quartic(double c4, double c3, double c2, double c1, double c0, std::array<double, 4>& roots) {
  const std::array<double, 5> coeffs{c0, c1, c2, c3, c4};
  if (c4 == 0.0) {
    std::array<double, 3> r3{};
    const int n = solve_cubic(c3, c2, c1, c0, r3);
    for (int i = 0; i < n; ++i) roots[i] = polish(coeffs, r3[i]);
    return n;
  }
  const double a = c3 / c4, b = c2 / c4, c = c1 / c4, d = c0 / c4;
  // x = y - a/4 gives y^4 + p y^2 + q y + r.
  const double a2 = a * a;
  const double p = b - 3 * a2 / 8;
  const double q = c - a * b / 2 + a2 * a / 8;
  const double r = d - a * c / 4 + a2 * b / 16 - 3 * a2 * a2 / 256;
  const double shift = -a / 4;

  double ys[4];
  int n = 0;
  const double scale = std::max({std::abs(p) * std::abs(p), std::abs(r), 1e-300});
  if (std::abs(q) * std::abs(q) <= 1e-30 * scale * std::max(std::abs(p), 1.0)) {
    // Biquadratic: z = y^2.
    double zs[2];
    const int nz = solve_quadratic(1.0, p, r, zs);
    for (int i = 0; i < nz; ++i) {
      if (zs[i] >= 0) {
        const double s = std::sqrt(zs[i]);
        ys[n++] = s;
        ys[n++] = -s;
      }
    }
  } else {
    // Resolvent cubic m^3 + p m^2 + (p^2/4 - r) m - q^2/8 = 0; its largest
    // root is positive because the left side is -q^2/8 < 0 at m = 0.
    std::array<double, 3> ms{};
    const int nm = solve_cubic(1.0, p, p * p / 4 - r, -q * q / 8, ms);
    double m = ms[0];
    for (int i = 1; i < nm; ++i) m = std::max(m, ms[i]);
    if (m > 0) {
      const double s = std::sqrt(2 * m);
      const double t = q / (2 * s);
      double tmp[2];
      int k = solve_quadratic(1.0, -s, p / 2 + m + t, tmp);
      for (int i = 0; i < k; ++i) ys[n++] = tmp[i];
      k = solve_quadratic(1.0, s, p / 2 + m - t, tmp);
      for (int i = 0; i < k; ++i) ys[n++] = tmp[i];
    }
  }
  for (int i = 0; i < n; ++i) roots[i] = polish(coeffs, ys[i] + shift);
  return n;
}

}  // namespace caustic
