#include <doctest.h>

#include <cmath>

#include "caustic/curvature.hpp"
#include "support.hpp"

using namespace caustic;

namespace {

LensSurface spherical_cap(int grid, double width, double radius) {
  LensSurface lens = build_grid_lens(grid, grid, width, width, 120, 121, 1.49);
  for (std::size_t v = 0; v < lens.num_vertices(); ++v) {
    const double x = lens.vertex_x(static_cast<int>(v)), y = lens.vertex_y(static_cast<int>(v));
    lens.heights[v] = 121 - radius + std::sqrt(radius * radius - x * x - y * y);
  }
  return lens;
}

}  // namespace

TEST_CASE("flat and tilted planes have zero curvature") {
  const LensSurface flat = build_grid_lens(9, 9, 10, 10, 120, 121, 1.49);
  for (double h : vertex_mean_curvature(flat)) CHECK(h == 0.0);
  CHECK(e_smooth(flat) == 0.0);

  LensSurface tilted = flat;
  for (std::size_t v = 0; v < tilted.num_vertices(); ++v)
    tilted.heights[v] = 122 + 0.1 * tilted.vertex_x(static_cast<int>(v)) - 0.05 * tilted.vertex_y(static_cast<int>(v));
  for (double h : vertex_mean_curvature(tilted)) CHECK(std::abs(h) < 1e-12);
  CHECK(e_smooth(tilted) < 1e-20);
}

TEST_CASE("boundary vertices have zero curvature") {
  const LensSurface lens = test::bumpy_lens(11, 10, 120, 122, 0.3);
  const auto h = vertex_mean_curvature(lens);
  for (std::size_t v = 0; v < lens.num_vertices(); ++v)
    if (lens.is_boundary(static_cast<int>(v))) CHECK(h[v] == 0.0);
}

TEST_CASE("sphere cap curvature approaches one over the radius") {
  for (double radius : {20.0, 50.0}) {
    // spacing 10 / 64 is below R / 50 for both radii
    const LensSurface cap = spherical_cap(65, 10, radius);
    const auto h = vertex_mean_curvature(cap);
    double worst = 0;
    for (std::size_t v = 0; v < cap.num_vertices(); ++v)
      if (!cap.is_boundary(static_cast<int>(v))) worst = std::max(worst, std::abs(h[v] * radius - 1.0));
    CHECK(worst < 0.05);
    // A bowl has the opposite sign.
    LensSurface bowl = cap;
    for (double& z : bowl.heights) z = 250 - z;
    const auto hb = vertex_mean_curvature(bowl);
    CHECK(hb[32 * 65 + 32] == doctest::Approx(-h[32 * 65 + 32]).epsilon(1e-9));
  }
}

TEST_CASE("smoothness energy decreases under curvature flow") {
  // Explicit mean curvature flow z -= tau H with tau below the stability
  // limit for the 0.625 cm grid spacing.
  LensSurface lens = test::bumpy_lens(17, 10, 120, 122, 0.2);
  double prev = e_smooth(lens);
  for (int step = 0; step < 10; ++step) {
    const auto h = vertex_mean_curvature(lens);
    for (std::size_t v = 0; v < lens.num_vertices(); ++v) lens.heights[v] -= 0.05 * h[v];
    const double next = e_smooth(lens);
    CHECK(next < prev);
    prev = next;
  }
}

TEST_CASE("gradient step lowers the smoothness energy") {
  LensSurface lens = test::bumpy_lens(17, 10, 120, 122, 0.2);
  const SmoothnessTerm t = e_smooth_with_gradient(lens);
  CHECK(t.value == doctest::Approx(e_smooth(lens)).epsilon(1e-12));
  for (std::size_t v = 0; v < lens.num_vertices(); ++v) lens.heights[v] -= 1e-3 * t.gradient[v];
  CHECK(e_smooth(lens) < t.value);
}

TEST_CASE("smoothness gradient matches finite differences") {
  for (int grid : {5, 9}) {
    const LensSurface lens = test::bumpy_lens(grid, 10, 120, 122, 0.4, 0.7);
    const SmoothnessTerm t = e_smooth_with_gradient(lens);
    CHECK(t.degenerate_vertices == 0);
    CHECK(t.value == doctest::Approx(e_smooth(lens)).epsilon(1e-13));
    auto f = [&](std::span<const double> h) {
      LensSurface l = lens;
      l.heights.assign(h.begin(), h.end());
      return e_smooth(l);
    };
    std::vector<double> fd(lens.num_vertices());
    for (std::size_t i = 0; i < fd.size(); ++i) fd[i] = test::richardson_fd(f, lens.heights, i, 1e-4);
    double scale = 0;
    for (double g : fd) scale = std::max(scale, std::abs(g));
    for (std::size_t i = 0; i < fd.size(); ++i) CHECK(std::abs(t.gradient[i] - fd[i]) <= 1e-6 * scale);
  }
}
