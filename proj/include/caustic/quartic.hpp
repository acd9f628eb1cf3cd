#pragma once

#include <array>

namespace caustic {

/// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 (c3 != 0). Returns the count.
int solve_cubic(double c3, double c2, double c1, double c0, std::array<double, 3>& roots);

/// Real roots of c4 x^4 + ... + c0 by Ferrari's resolvent-cubic method.
/// Falls back to the cubic when c4 == 0. Roots are not sorted and may
/// repeat; each is refined with Newton steps on the original polynomial.
int solve_quartic(double c4, double c3, double c2, double c1, double c0, std::array<double, 4>& roots);

inline double eval_poly4(const std::array<double, 5>& c, double x) {
  return (((c[4] * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0];
}

}  // namespace caustic
